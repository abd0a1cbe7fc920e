#include "finpanel/articulate.hpp"
#include "finpanel/eligibility.hpp"
#include "finpanel/geocode.hpp"
#include "finpanel/ingest.hpp"
#include "finpanel/synth.hpp"
#include "finpanel/types.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>

namespace py = pybind11;
using namespace finpanel;

namespace {

// python-facing statements are {"2110": 500, ...} dicts in thousands of rubles
LineValues lines_from_dict(const std::map<std::string, Money> &values) {
    LineValues lines;
    for (const auto &[text, value] : values) {
        auto code = LineCode::parse(text);
        if (!code) {
            throw py::value_error("unknown line code: " + text);
        }
        lines[*code] = value;
    }
    return lines;
}

std::map<std::string, Money> lines_to_dict(const LineValues &lines) {
    std::map<std::string, Money> out;
    for (const auto &[code, value] : lines) {
        out[std::string(code.str())] = value;
    }
    return out;
}

HarmonizedStatement statement_of(const std::map<std::string, Money> &values,
                                 const std::string &form) {
    auto parsed = parse_form(form);
    if (!parsed) {
        throw py::value_error("form must be 'full' or 'simplified'");
    }
    HarmonizedStatement s;
    s.inn = "0000000000";
    s.year = 2020;
    s.form = *parsed;
    s.simplified = s.form == Form::kSimplified;
    s.lines = lines_from_dict(values);
    return s;
}

} // namespace

PYBIND11_MODULE(_finpanel, m) {
    m.doc() = "firm-registry and financial-statement panel building primitives";

    m.def("line_codes", [] {
        std::vector<std::string> out;
        for (const auto &code : line_registry()) {
            out.push_back(std::string(code.str()));
        }
        return out;
    });
    m.def("line_section", [](const std::string &text) {
        auto code = LineCode::parse(text);
        if (!code) {
            throw py::value_error("unknown line code: " + text);
        }
        return to_string(code->section());
    });
    m.def("is_line_code", [](const std::string &text) {
        return LineCode::parse(text).has_value();
    });

    m.def("equations", [] {
        py::list out;
        for (const auto &eq : articulate::equation_registry()) {
            py::dict d;
            d["id"] = eq.id;
            d["form"] = to_string(eq.form_scope);
            d["total"] = std::string(eq.total.str());
            py::list terms;
            for (const auto &term : eq.terms) {
                terms.append(py::make_tuple(term.sign, std::string(term.code.str())));
            }
            d["terms"] = terms;
            d["includes_optional"] = eq.includes_optional;
            out.append(d);
        }
        return out;
    });

    m.def(
        "check_articulation",
        [](const std::map<std::string, Money> &lines, const std::string &form) {
            auto stmt = statement_of(lines, form);
            auto result = articulate::check_articulation(stmt);
            py::list failed;
            for (const auto &check : result.checks) {
                if (check.applicable && !check.pass) {
                    failed.append(check.id);
                }
            }
            py::dict out;
            out["articulated"] = result.articulated;
            out["failed"] = failed;
            return out;
        },
        py::arg("lines"), py::arg("form") = "full");

    m.def(
        "adjust_totals",
        [](const std::map<std::string, Money> &lines, const std::string &form) {
            auto stmt = statement_of(lines, form);
            articulate::adjust_totals(stmt);
            py::dict out;
            out["lines"] = lines_to_dict(stmt.lines);
            out["totals_adjustment"] = stmt.totals_adjustment;
            return out;
        },
        py::arg("lines"), py::arg("form") = "full");

    m.def(
        "normalize_to_thousands",
        [](Money value, const std::string &unit) {
            auto parsed = parse_unit(unit);
            if (!parsed) {
                throw py::value_error("unit must be rubles, thousands, or millions");
            }
            RawFiling filing;
            filing.unit = *parsed;
            filing.current[LineCode::of("2110")] = value;
            ingest::normalize_units(filing);
            return filing.current[LineCode::of("2110")];
        },
        py::arg("value"), py::arg("unit"));

    m.def("quality_for_rank",
          [](int rank) { return to_string(quality_for_rank(rank)); });

    m.def(
        "grid_cell",
        [](double lon, double lat, double cell_size_km) {
            geo::GridConfig config;
            config.cell_size_km = cell_size_km;
            auto [x, y] = geo::cell_index(lon, lat, config);
            return py::make_tuple(x, y);
        },
        py::arg("lon"), py::arg("lat"), py::arg("cell_size_km") = 1.0);

    m.def(
        "generate_corpus",
        [](const std::filesystem::path &dir, int n_firms, std::uint64_t seed,
           double filing_rate, double articulation_error_rate, int anomaly_count) {
            synth::CorpusPlan plan;
            plan.n_firms = n_firms;
            plan.seed = seed;
            plan.filing_rate = filing_rate;
            plan.articulation_error_rate = articulation_error_rate;
            plan.anomaly_count = anomaly_count;
            auto summary = synth::generate(plan, dir);
            py::dict out;
            out["universe_rows"] = summary.n_universe_rows;
            out["eligible_firm_years"] = summary.n_eligible_firm_years;
            out["filed_eligible"] = summary.n_filed_eligible;
            out["noneligible_filers"] = summary.n_noneligible_filers;
            out["gaps"] = summary.n_gaps;
            out["recoverable_t1"] = summary.n_recoverable_t1;
            out["recoverable_t2"] = summary.n_recoverable_t2;
            return out;
        },
        py::arg("dir"), py::arg("n_firms") = 500, py::arg("seed") = 1,
        py::arg("filing_rate") = 0.7, py::arg("articulation_error_rate") = 0.05,
        py::arg("anomaly_count") = 0);

    m.attr("ARTICULATION_THRESHOLD") = static_cast<Money>(articulate::kThreshold);
    m.attr("__version__") = "0.1.0";
}
