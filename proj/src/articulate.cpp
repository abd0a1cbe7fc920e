#include "finpanel/articulate.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"

#include <cstdlib>
#include <sstream>

namespace finpanel::articulate {

namespace {

Equation make_equation(std::string id, Form form, std::string_view total,
                       std::string_view signed_terms, bool includes_optional = false) {
    Equation eq{std::move(id), form, LineCode::of(total), {}, includes_optional};
    for (const auto &tok : split(signed_terms, ' ')) {
        if (tok.empty()) {
            continue;
        }
        const int sign = tok[0] == '-' ? -1 : +1;
        eq.terms.push_back({sign, LineCode::of(tok.substr(1))});
    }
    return eq;
}

std::vector<Equation> build_registry() {
    const Form full = Form::kFull;
    const Form simp = Form::kSimplified;
    std::vector<Equation> eqs;
    eqs.reserve(26);
    // full statements: balance sheet
    eqs.push_back(make_equation("full_1100", full, "1100",
                                "+1110 +1120 +1130 +1140 +1150 +1160 +1170 +1180 +1190"));
    eqs.push_back(make_equation("full_1200", full, "1200",
                                "+1210 +1220 +1230 +1240 +1250 +1260"));
    eqs.push_back(make_equation("full_1300", full, "1300",
                                "+1310 +1320 +1330 +1340 +1350 +1360 +1370"));
    eqs.push_back(make_equation("full_1400", full, "1400", "+1410 +1420 +1430 +1450"));
    eqs.push_back(make_equation("full_1500", full, "1500", "+1510 +1520 +1530 +1540 +1550"));
    eqs.push_back(make_equation("full_1600_sum", full, "1600", "+1200 +1100"));
    eqs.push_back(make_equation("full_1600_eq_1700", full, "1600", "+1700"));
    eqs.push_back(make_equation("full_1700", full, "1700", "+1300 +1400 +1500"));
    // full statements: profit and loss
    eqs.push_back(make_equation("full_2100", full, "2100", "+2110 -2120"));
    eqs.push_back(make_equation("full_2200", full, "2200", "+2100 -2210 -2220"));
    eqs.push_back(make_equation("full_2300", full, "2300",
                                "+2200 -2310 +2320 -2330 +2340 -2350"));
    // full statements: cash flow
    eqs.push_back(make_equation("full_4100", full, "4100", "+4110 -4120"));
    eqs.push_back(make_equation("full_4110", full, "4110",
                                "+4111 +4112 +4113 +4114 +4116 +4119", true));
    eqs.push_back(make_equation("full_4120", full, "4120",
                                "+4121 +4122 +4123 +4124 +4126 +4129", true));
    eqs.push_back(make_equation("full_4200", full, "4200", "+4210 -4220"));
    eqs.push_back(make_equation("full_4210", full, "4210",
                                "+4211 +4212 +4213 +4214 +4216 +4219", true));
    eqs.push_back(make_equation("full_4220", full, "4220",
                                "+4221 +4222 +4223 +4224 +4226 +4229", true));
    eqs.push_back(make_equation("full_4300", full, "4300", "+4310 -4320"));
    eqs.push_back(make_equation("full_4310", full, "4310",
                                "+4311 +4312 +4313 +4314 +4316 +4319", true));
    eqs.push_back(make_equation("full_4320", full, "4320",
                                "+4321 +4322 +4323 +4324 +4326 +4329", true));
    eqs.push_back(make_equation("full_4400", full, "4400", "+4100 +4200 +4300"));
    eqs.push_back(make_equation("full_4500", full, "4500", "+4400 +4450 +4490"));
    // simplified statements: balance sheet
    eqs.push_back(make_equation("simp_1600_sum", simp, "1600",
                                "+1150 +1170 +1210 +1250 +1230"));
    eqs.push_back(make_equation("simp_1600_eq_1700", simp, "1600", "+1700"));
    eqs.push_back(make_equation("simp_1700", simp, "1700",
                                "+1300 +1410 +1450 +1510 +1520 +1550"));
    // simplified statements: profit and loss
    eqs.push_back(make_equation("simp_2400", simp, "2400",
                                "+2110 -2120 -2330 +2340 -2350 -2410"));
    return eqs;
}

} // namespace

const std::vector<Equation> &equation_registry() {
    static const std::vector<Equation> registry = build_registry();
    return registry;
}

const std::vector<std::size_t> &adjustment_order(Form form) {
    // Leaf equations first so substituted section totals feed the composite
    // totals; the 1600 = 1700 identity runs last, after both sides are
    // repaired from their components.
    static const std::vector<std::size_t> full_order = {
        0, 1, 2, 3, 4,      // 1100 1200 1300 1400 1500
        8, 9, 10,           // 2100 2200 2300
        12, 13, 15, 16, 18, 19, // 4110 4120 4210 4220 4310 4320
        11, 14, 17,         // 4100 4200 4300
        20, 21,             // 4400 4500
        5, 7,               // 1600 = 1200 + 1100, 1700 = 1300 + 1400 + 1500
        6,                  // 1600 = 1700
    };
    static const std::vector<std::size_t> simplified_order = {
        22, 24, 25, // 1600, 1700, 2400 component sums
        23,         // 1600 = 1700
    };
    return form == Form::kFull ? full_order : simplified_order;
}

std::optional<Money> compute_total(const LineValues &lines, const Equation &eq) {
    Money sum = 0;
    bool any_present = false;
    for (const auto &term : eq.terms) {
        if (auto v = get_line(lines, term.code)) {
            sum += term.sign * *v;
            any_present = true;
        }
    }
    if (eq.includes_optional) {
        if (auto x = optional_sum_for_parent(eq.total)) {
            if (auto v = get_line(lines, *x)) {
                sum += *v;
                any_present = true;
            }
        }
    }
    if (!any_present) {
        return std::nullopt;
    }
    return sum;
}

ArticulationResult check_articulation(const HarmonizedStatement &stmt) {
    ArticulationResult result;
    for (const auto &eq : equation_registry()) {
        if (eq.form_scope != stmt.form) {
            continue;
        }
        EquationCheck check;
        check.id = eq.id;
        check.stated = get_line(stmt.lines, eq.total);
        check.computed = compute_total(stmt.lines, eq);
        check.applicable = check.stated.has_value() && check.computed.has_value();
        if (check.applicable) {
            check.discrepancy = std::llabs(*check.stated - *check.computed);
            check.pass = check.discrepancy <= kThreshold;
            if (!check.pass) {
                result.articulated = false;
            }
        }
        result.checks.push_back(std::move(check));
    }
    return result;
}

void adjust_totals(HarmonizedStatement &stmt) {
    const auto &registry = equation_registry();
    for (std::size_t idx : adjustment_order(stmt.form)) {
        const auto &eq = registry[idx];
        auto computed = compute_total(stmt.lines, eq);
        if (!computed) {
            continue;
        }
        auto stated = get_line(stmt.lines, eq.total);
        if (!stated || std::llabs(*stated - *computed) > kThreshold) {
            stmt.lines[eq.total] = *computed;
            stmt.totals_adjustment = true;
        }
    }
    if (stmt.form == Form::kSimplified) {
        // Totals the simplified form does not carry are calculated from the
        // components it does, via the full-form equations; present values
        // are never overwritten and the adjustment flag is not touched.
        for (std::size_t idx : adjustment_order(Form::kFull)) {
            const auto &eq = registry[idx];
            if (get_line(stmt.lines, eq.total)) {
                continue;
            }
            if (auto computed = compute_total(stmt.lines, eq)) {
                stmt.lines[eq.total] = *computed;
            }
        }
    }
}

std::vector<Equation> read_equation_file(const std::filesystem::path &path) {
    auto rows = csv::read_all(path);
    if (rows.empty()) {
        throw PipelineError("MISSING_INPUT", "empty equation file " + path.string());
    }
    std::vector<Equation> eqs;
    for (std::size_t i = 1; i < rows.size(); ++i) { // skip header
        const auto &row = rows[i];
        if (row.size() != 5) {
            throw PipelineError("MALFORMED_ROW",
                                "equation file row " + std::to_string(i + 1));
        }
        auto form = parse_form(row[0]);
        if (!form) {
            throw PipelineError("MALFORMED_ROW", "bad form in equation file: " + row[0]);
        }
        Equation eq = make_equation(row[1], *form, row[2], row[3], row[4] == "true");
        eqs.push_back(std::move(eq));
    }
    return eqs;
}

} // namespace finpanel::articulate
