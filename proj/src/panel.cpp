#include "finpanel/panel.hpp"

#include "finpanel/util.hpp"

#include <algorithm>
#include <cstdio>

namespace finpanel::panel {

namespace {

using Key = std::pair<std::string, int>;

std::string format_share(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.7f", v);
    return buf;
}

template <typename T, typename KeyFn>
std::map<Key, const T *> index_by_key(const std::vector<T> &items, KeyFn key_fn,
                                      const char *what) {
    std::map<Key, const T *> index;
    for (const auto &item : items) {
        auto [it, inserted] = index.emplace(key_fn(item), &item);
        if (!inserted) {
            throw PipelineError("KEY_COLLISION", std::string(what) + " duplicated for inn " +
                                                     it->first.first + " year " +
                                                     std::to_string(it->first.second));
        }
    }
    return index;
}

} // namespace

std::vector<PanelRow> assemble(const std::vector<FirmRecord> &universe,
                               const std::vector<eligibility::EligibilityRow> &eligibility,
                               const std::vector<HarmonizedStatement> &statements,
                               const std::vector<geo::GeoRow> &geo,
                               const std::set<std::pair<std::string, int>> &anomalies,
                               DiagnosticSink &sink) {
    auto universe_index = index_by_key(
        universe, [](const FirmRecord &r) { return Key{r.inn, r.year}; }, "universe row");
    auto eligibility_index = index_by_key(
        eligibility,
        [](const eligibility::EligibilityRow &r) {
            return Key{r.inn, r.year};
        },
        "eligibility row");
    auto statement_index = index_by_key(
        statements,
        [](const HarmonizedStatement &s) {
            return Key{s.inn, s.year};
        },
        "statement");
    auto geo_index = index_by_key(
        geo, [](const geo::GeoRow &r) { return Key{r.inn, r.year}; }, "geolocation row");

    for (const auto &[key, stmt] : statement_index) {
        if (universe_index.count(key) == 0) {
            sink.add(Severity::kWarning, "NO_UNIVERSE_MATCH",
                     "statement dropped: no registry record", key.first, key.second);
        }
    }

    std::vector<PanelRow> rows;
    rows.reserve(universe.size());
    for (const auto &[key, record] : universe_index) {
        auto elig_it = eligibility_index.find(key);
        if (elig_it == eligibility_index.end()) {
            throw PipelineError("MISSING_INPUT", "no eligibility decision for inn " +
                                                     key.first + " year " +
                                                     std::to_string(key.second));
        }
        PanelRow row;
        row.firm = *record;
        row.eligibility = elig_it->second->decision;
        row.financial = elig_it->second->financial;
        auto stmt_it = statement_index.find(key);
        if (stmt_it != statement_index.end()) {
            row.statement = *stmt_it->second;
            row.filed = !stmt_it->second->imputed;
        }
        if (!row.eligibility.eligible && !row.filed) {
            continue; // non-eligible non-filers leave the data set
        }
        auto geo_it = geo_index.find(key);
        if (geo_it != geo_index.end()) {
            row.geo = geo_it->second->location;
        }
        row.anomalous = anomalies.count(key) > 0;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FilingRateRow> filing_rate_report(const std::vector<PanelRow> &rows) {
    struct Counts {
        std::size_t eligible = 0;
        std::size_t filed = 0;
        std::size_t imputed = 0;
    };
    std::map<std::pair<std::string, int>, Counts> groups; // (scope, year)
    for (const auto &row : rows) {
        if (row.anomalous) {
            continue;
        }
        for (const std::string &scope : {std::string("ALL"), row.firm.region}) {
            auto &c = groups[{scope, row.firm.year}];
            if (!row.eligibility.eligible) {
                continue; // group exists; the rate stays over eligible firms
            }
            ++c.eligible;
            if (row.filed) {
                ++c.filed;
            } else if (row.statement) {
                ++c.imputed;
            }
        }
    }
    std::vector<FilingRateRow> out;
    for (const auto &[key, c] : groups) {
        FilingRateRow r;
        r.scope = key.first;
        r.year = key.second;
        r.n_eligible = c.eligible;
        r.n_filed = c.filed;
        r.n_imputed = c.imputed;
        if (c.eligible > 0) {
            r.rate = static_cast<double>(c.filed) / static_cast<double>(c.eligible);
            r.rate_with_imputed =
                static_cast<double>(c.filed + c.imputed) / static_cast<double>(c.eligible);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ArticulationShareRow> articulation_report(const std::vector<PanelRow> &rows) {
    const LineCode revenue = LineCode::of("2110");
    std::map<int, ArticulationShareRow> by_year;
    for (const auto &row : rows) {
        by_year[row.firm.year].year = row.firm.year; // report covers every panel year
        if (row.anomalous || !row.filed || !row.statement) {
            continue;
        }
        auto &r = by_year[row.firm.year];
        ++r.n_filed;
        auto rev = get_line(row.statement->lines, revenue);
        const Money weight = rev && *rev > 0 ? *rev : 0;
        r.weighted_den += weight;
        if (row.statement->articulated) {
            ++r.n_articulated;
            r.weighted_num += weight;
        }
    }
    std::vector<ArticulationShareRow> out;
    for (auto &[year, r] : by_year) {
        if (r.n_filed > 0) {
            r.share = static_cast<double>(r.n_articulated) / static_cast<double>(r.n_filed);
        }
        if (r.weighted_den > 0) {
            r.weighted_share =
                static_cast<double>(r.weighted_num) / static_cast<double>(r.weighted_den);
        }
        out.push_back(std::move(r));
    }
    return out;
}

ExternalAggregates ExternalAggregates::load(const std::filesystem::path &path) {
    ExternalAggregates external;
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 4) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        auto year = parse_int(row[0]);
        if (!year) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": bad year '" + row[0] + "'");
        }
        YearValues values;
        if (!row[1].empty()) {
            values.gross_output = parse_int(row[1]);
        }
        if (!row[2].empty()) {
            values.intermediate_consumption = parse_int(row[2]);
        }
        if (!row[3].empty()) {
            values.gdp = parse_int(row[3]);
        }
        external.years[static_cast<int>(*year)] = values;
    }
    return external;
}

std::vector<AggregateRatioRow> aggregate_ratio_report(const std::vector<PanelRow> &rows,
                                                      const ExternalAggregates &external,
                                                      LineCode materials_code,
                                                      DiagnosticSink &sink) {
    const LineCode revenue = LineCode::of("2110");
    std::map<int, AggregateRatioRow> by_year;
    for (const auto &row : rows) {
        by_year[row.firm.year].year = row.firm.year;
        if (row.anomalous || !row.statement) {
            continue;
        }
        auto &r = by_year[row.firm.year];
        auto rev = get_line(row.statement->lines, revenue);
        auto mat = get_line(row.statement->lines, materials_code);
        if (rev && *rev > 0) {
            r.revenue_sum += *rev;
        }
        if (mat && *mat > 0) {
            r.materials_sum += *mat;
        }
        if (rev && *rev > 0 && mat && *mat > 0) {
            r.value_added_sum += *rev - *mat;
        }
    }
    std::vector<AggregateRatioRow> out;
    for (auto &[year, r] : by_year) {
        auto ext = external.years.find(year);
        if (ext == external.years.end()) {
            sink.add(Severity::kWarning, "MISSING_EXTERNAL_YEAR",
                     "no external aggregates for year", "", year);
        } else {
            auto ratio = [](Money numerator, std::optional<Money> denominator)
                -> std::optional<double> {
                if (!denominator || *denominator == 0) {
                    return std::nullopt;
                }
                return static_cast<double>(numerator) / static_cast<double>(*denominator);
            };
            r.revenue_ratio = ratio(r.revenue_sum, ext->second.gross_output);
            r.materials_ratio = ratio(r.materials_sum, ext->second.intermediate_consumption);
            r.value_added_ratio = ratio(r.value_added_sum, ext->second.gdp);
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_filing_rate_csv(const std::filesystem::path &path,
                           const std::vector<FilingRateRow> &rows) {
    csv::Writer out(path);
    out.write({"scope", "year", "n_eligible", "n_filed", "n_imputed", "rate",
               "rate_with_imputed"});
    for (const auto &r : rows) {
        out.write({r.scope, std::to_string(r.year), std::to_string(r.n_eligible),
                   std::to_string(r.n_filed), std::to_string(r.n_imputed),
                   r.rate ? format_share(*r.rate) : "",
                   r.rate_with_imputed ? format_share(*r.rate_with_imputed) : ""});
    }
    out.close();
}

void write_articulation_csv(const std::filesystem::path &path,
                            const std::vector<ArticulationShareRow> &rows) {
    csv::Writer out(path);
    out.write({"year", "n_filed", "n_articulated", "share", "weighted_num", "weighted_den",
               "weighted_share"});
    for (const auto &r : rows) {
        out.write({std::to_string(r.year), std::to_string(r.n_filed),
                   std::to_string(r.n_articulated), r.share ? format_share(*r.share) : "",
                   std::to_string(r.weighted_num), std::to_string(r.weighted_den),
                   r.weighted_share ? format_share(*r.weighted_share) : ""});
    }
    out.close();
}

void write_ratio_csv(const std::filesystem::path &path,
                     const std::vector<AggregateRatioRow> &rows) {
    csv::Writer out(path);
    out.write({"year", "revenue_sum", "materials_sum", "value_added_sum", "revenue_ratio",
               "materials_ratio", "value_added_ratio"});
    for (const auto &r : rows) {
        out.write({std::to_string(r.year), std::to_string(r.revenue_sum),
                   std::to_string(r.materials_sum), std::to_string(r.value_added_sum),
                   r.revenue_ratio ? format_share(*r.revenue_ratio) : "",
                   r.materials_ratio ? format_share(*r.materials_ratio) : "",
                   r.value_added_ratio ? format_share(*r.value_added_ratio) : ""});
    }
    out.close();
}

const std::vector<std::string> &export_columns() {
    static const std::vector<std::string> columns = [] {
        std::vector<std::string> cols = {
            "year",          "inn",
            "ogrn",          "region",
            "region_taxcode", "creation_date",
            "dissolution_date", "age",
            "eligible",      "exempt_criteria",
            "financial",     "filed",
            "imputed",       "simplified",
            "articulated",   "totals_adjustment",
            "okved",         "okved_section",
            "okpo",          "okopf",
            "okogu",         "okfc",
            "oktmo",         "lon",
            "lat",           "geocoding_quality",
        };
        for (const auto &code : line_registry()) {
            if (code.exported()) {
                cols.push_back("line_" + std::string(code.str()));
            }
        }
        return cols;
    }();
    return columns;
}

namespace {

csv::Row panel_row_to_csv(const PanelRow &row) {
    const FirmRecord &f = row.firm;
    csv::Row out;
    out.reserve(export_columns().size());
    out.push_back(std::to_string(f.year));
    out.push_back(f.inn);
    out.push_back(f.ogrn);
    out.push_back(f.region);
    out.push_back(f.region_taxcode);
    out.push_back(to_string(f.creation_date));
    out.push_back(f.dissolution_date ? to_string(*f.dissolution_date) : "");
    out.push_back(std::to_string(f.age));
    out.push_back(row.eligibility.eligible ? "true" : "false");
    out.push_back(row.eligibility.exempt_criteria
                      ? to_string(*row.eligibility.exempt_criteria)
                      : "");
    out.push_back(row.financial ? "true" : "false");
    out.push_back(row.filed ? "true" : "false");
    if (row.statement) {
        out.push_back(row.statement->imputed ? "true" : "false");
        out.push_back(row.statement->simplified ? "true" : "false");
        out.push_back(row.statement->articulated ? "true" : "false");
        out.push_back(row.statement->totals_adjustment ? "true" : "false");
    } else {
        out.insert(out.end(), {"", "", "", ""});
    }
    out.push_back(f.okved);
    out.push_back(okved_section(f.okved));
    out.push_back(f.okpo);
    out.push_back(f.okopf);
    out.push_back(f.okogu);
    out.push_back(f.okfs);
    out.push_back(f.oktmo);
    if (row.geo && row.geo->quality != GeoQuality::kNone) {
        out.push_back(format_coord(row.geo->lon));
        out.push_back(format_coord(row.geo->lat));
    } else {
        out.insert(out.end(), {"", ""});
    }
    out.push_back(row.geo && row.geo->address_rank > 0
                      ? std::to_string(row.geo->address_rank)
                      : "");
    for (const auto &code : line_registry()) {
        if (!code.exported()) {
            continue;
        }
        if (row.statement) {
            if (auto v = get_line(row.statement->lines, code)) {
                out.push_back(std::to_string(*v));
                continue;
            }
        }
        out.emplace_back();
    }
    return out;
}

} // namespace

void export_panel(const std::vector<PanelRow> &rows, const std::filesystem::path &out_dir,
                  int span_start, int span_end) {
    std::filesystem::create_directories(out_dir);
    std::map<int, std::vector<const PanelRow *>> by_year;
    for (int year = span_start; year <= span_end; ++year) {
        by_year[year];
    }
    for (const auto &row : rows) {
        by_year[row.firm.year].push_back(&row);
    }
    for (auto &[year, year_rows] : by_year) {
        std::sort(year_rows.begin(), year_rows.end(),
                  [](const PanelRow *a, const PanelRow *b) {
                      return a->firm.inn < b->firm.inn;
                  });
        csv::Writer out(out_dir / ("panel_" + std::to_string(year) + ".csv"));
        out.write(export_columns());
        for (const PanelRow *row : year_rows) {
            out.write(panel_row_to_csv(*row));
        }
        out.close();
    }
}

std::vector<csv::Row> read_partition(const std::filesystem::path &path) {
    return csv::read_all(path);
}

} // namespace finpanel::panel
