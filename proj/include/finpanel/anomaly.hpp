#pragma once

#include "finpanel/diagnostics.hpp"
#include "finpanel/types.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace finpanel::anomaly {

/// A statement joined with the registry attributes ranking needs.
struct StatementContext {
    const HarmonizedStatement *statement = nullptr;
    std::string okved;
    bool financial = false;
};

struct QueueEntry {
    std::string trigger; // top_revenue, top_assets, yoy_revenue, yoy_assets, imputed_revenue
    int rank = 0;
    std::string inn;
    int year = 0;
    std::string metric; // line code
    std::string value;
};

/// Manual-review candidates: (a) top-n firms by revenue or total assets per
/// 2-digit industry, financial firms excluded; (b) largest year-on-year
/// relative changes in the key financials; (c) imputed statements with the
/// largest revenue. Deterministic; ranking ties break on (inn, year).
std::vector<QueueEntry> review_queue(const std::vector<StatementContext> &contexts,
                                     int n_top);

void write_queue_csv(const std::filesystem::path &path,
                     const std::vector<QueueEntry> &queue);

struct Exclusion {
    std::string inn;
    int year = 0;
    std::string reason;
};

std::vector<Exclusion> load_exclusions(const std::filesystem::path &path);

/// Validates the curated list against the firm-years that actually carry
/// statements; entries with no statement get an UNMATCHED_EXCLUSION
/// diagnostic. Returns the matched keys.
std::set<std::pair<std::string, int>>
match_exclusions(const std::set<std::pair<std::string, int>> &statement_keys,
                 const std::vector<Exclusion> &exclusions, DiagnosticSink &sink);

/// Sets the anomalous flag on matching rows; nothing is deleted and no
/// other field is touched.
void apply_exclusions(std::vector<PanelRow> &rows, const std::vector<Exclusion> &exclusions,
                      DiagnosticSink &sink);

void write_anomalies_csv(const std::filesystem::path &path,
                         const std::set<std::pair<std::string, int>> &keys);
std::set<std::pair<std::string, int>> read_anomalies_csv(const std::filesystem::path &path);

} // namespace finpanel::anomaly
