#include "finpanel/anomaly.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace finpanel::anomaly {

namespace {

std::string format_ratio(double r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", r);
    return buf;
}

struct Candidate {
    Money value = 0;
    std::string inn;
    int year = 0;

    bool operator<(const Candidate &other) const {
        // descending by value, ties in (inn, year) order
        return std::tie(other.value, inn, year) < std::tie(value, other.inn, other.year);
    }
};

void top_by_industry(const std::vector<StatementContext> &contexts, LineCode metric,
                     const std::string &trigger, int n_top, std::vector<QueueEntry> &out) {
    // firm -> (industry, best value, year of best value)
    struct Best {
        std::string industry;
        Money value = 0;
        int year = 0;
        bool set = false;
    };
    std::map<std::string, Best> best_by_firm;
    for (const auto &ctx : contexts) {
        if (ctx.financial) {
            continue;
        }
        auto v = get_line(ctx.statement->lines, metric);
        if (!v) {
            continue;
        }
        auto &best = best_by_firm[ctx.statement->inn];
        if (!best.set || *v > best.value || (*v == best.value && ctx.statement->year < best.year)) {
            best = {ctx.okved.substr(0, std::min<std::size_t>(2, ctx.okved.size())), *v,
                    ctx.statement->year, true};
        }
    }
    std::map<std::string, std::vector<Candidate>> by_industry;
    for (const auto &[inn, best] : best_by_firm) {
        by_industry[best.industry].push_back({best.value, inn, best.year});
    }
    for (auto &[industry, candidates] : by_industry) {
        std::sort(candidates.begin(), candidates.end());
        const std::size_t keep = std::min<std::size_t>(candidates.size(), n_top);
        for (std::size_t i = 0; i < keep; ++i) {
            out.push_back({trigger, static_cast<int>(i + 1), candidates[i].inn,
                           candidates[i].year, std::string(metric.str()),
                           std::to_string(candidates[i].value)});
        }
    }
}

void top_yoy_changes(const std::vector<StatementContext> &contexts, LineCode metric,
                     const std::string &trigger, int n_top, std::vector<QueueEntry> &out) {
    std::map<std::pair<std::string, int>, Money> values;
    for (const auto &ctx : contexts) {
        if (auto v = get_line(ctx.statement->lines, metric)) {
            if (*v > 0) {
                values[{ctx.statement->inn, ctx.statement->year}] = *v;
            }
        }
    }
    struct Jump {
        double ratio = 0.0;
        std::string inn;
        int year = 0;

        bool operator<(const Jump &other) const {
            return std::tie(other.ratio, inn, year) < std::tie(ratio, other.inn, other.year);
        }
    };
    std::vector<Jump> jumps;
    for (const auto &[key, value] : values) {
        auto prev = values.find({key.first, key.second - 1});
        if (prev == values.end()) {
            continue;
        }
        const double a = static_cast<double>(value);
        const double b = static_cast<double>(prev->second);
        jumps.push_back({std::max(a / b, b / a), key.first, key.second});
    }
    std::sort(jumps.begin(), jumps.end());
    const std::size_t keep = std::min<std::size_t>(jumps.size(), n_top);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back({trigger, static_cast<int>(i + 1), jumps[i].inn, jumps[i].year,
                       std::string(metric.str()), format_ratio(jumps[i].ratio)});
    }
}

} // namespace

std::vector<QueueEntry> review_queue(const std::vector<StatementContext> &contexts,
                                     int n_top) {
    std::vector<QueueEntry> out;
    const LineCode revenue = LineCode::of("2110");
    const LineCode assets = LineCode::of("1600");
    top_by_industry(contexts, revenue, "top_revenue", n_top, out);
    top_by_industry(contexts, assets, "top_assets", n_top, out);
    top_yoy_changes(contexts, revenue, "yoy_revenue", n_top, out);
    top_yoy_changes(contexts, assets, "yoy_assets", n_top, out);

    std::vector<Candidate> imputed;
    for (const auto &ctx : contexts) {
        if (!ctx.statement->imputed) {
            continue;
        }
        if (auto v = get_line(ctx.statement->lines, revenue)) {
            imputed.push_back({*v, ctx.statement->inn, ctx.statement->year});
        }
    }
    std::sort(imputed.begin(), imputed.end());
    const std::size_t keep = std::min<std::size_t>(imputed.size(), n_top);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back({"imputed_revenue", static_cast<int>(i + 1), imputed[i].inn,
                       imputed[i].year, "2110", std::to_string(imputed[i].value)});
    }

    std::sort(out.begin(), out.end(), [](const QueueEntry &a, const QueueEntry &b) {
        return std::tie(a.trigger, a.metric, a.rank, a.inn, a.year) <
               std::tie(b.trigger, b.metric, b.rank, b.inn, b.year);
    });
    return out;
}

void write_queue_csv(const std::filesystem::path &path,
                     const std::vector<QueueEntry> &queue) {
    csv::Writer out(path);
    out.write({"trigger", "rank", "inn", "year", "metric", "value"});
    for (const auto &entry : queue) {
        out.write({entry.trigger, std::to_string(entry.rank), entry.inn,
                   std::to_string(entry.year), entry.metric, entry.value});
    }
    out.close();
}

std::vector<Exclusion> load_exclusions(const std::filesystem::path &path) {
    std::vector<Exclusion> exclusions;
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 3) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        auto year = parse_int(row[1]);
        if (!year) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": bad year '" + row[1] + "'");
        }
        exclusions.push_back({row[0], static_cast<int>(*year), row[2]});
    }
    return exclusions;
}

std::set<std::pair<std::string, int>>
match_exclusions(const std::set<std::pair<std::string, int>> &statement_keys,
                 const std::vector<Exclusion> &exclusions, DiagnosticSink &sink) {
    std::set<std::pair<std::string, int>> matched;
    for (const auto &e : exclusions) {
        if (statement_keys.count({e.inn, e.year}) > 0) {
            matched.insert({e.inn, e.year});
        } else {
            sink.add(Severity::kWarning, "UNMATCHED_EXCLUSION",
                     "no statement for excluded firm-year", e.inn, e.year);
        }
    }
    return matched;
}

void apply_exclusions(std::vector<PanelRow> &rows, const std::vector<Exclusion> &exclusions,
                      DiagnosticSink &sink) {
    std::set<std::pair<std::string, int>> keys;
    for (const auto &row : rows) {
        if (row.statement) {
            keys.insert({row.firm.inn, row.firm.year});
        }
    }
    auto matched = match_exclusions(keys, exclusions, sink);
    for (auto &row : rows) {
        if (matched.count({row.firm.inn, row.firm.year}) > 0) {
            row.anomalous = true;
        }
    }
}

void write_anomalies_csv(const std::filesystem::path &path,
                         const std::set<std::pair<std::string, int>> &keys) {
    csv::Writer out(path);
    out.write({"inn", "year"});
    for (const auto &[inn, year] : keys) {
        out.write({inn, std::to_string(year)});
    }
    out.close();
}

std::set<std::pair<std::string, int>> read_anomalies_csv(const std::filesystem::path &path) {
    std::set<std::pair<std::string, int>> keys;
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 2) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        keys.insert({row[0], static_cast<int>(parse_int(row[1]).value_or(0))});
    }
    return keys;
}

} // namespace finpanel::anomaly
