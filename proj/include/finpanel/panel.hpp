#pragma once

#include "finpanel/csv.hpp"
#include "finpanel/diagnostics.hpp"
#include "finpanel/eligibility.hpp"
#include "finpanel/geocode.hpp"
#include "finpanel/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace finpanel::panel {

/// Joins the stage outputs into panel rows: every eligible firm-year
/// (whatever its filing status) plus the non-eligible filers; non-eligible
/// non-filers are dropped. Statements with no universe match are dropped
/// with a diagnostic; duplicate keys in any input are fatal KEY_COLLISION.
/// Output sorted by (inn, year).
std::vector<PanelRow> assemble(const std::vector<FirmRecord> &universe,
                               const std::vector<eligibility::EligibilityRow> &eligibility,
                               const std::vector<HarmonizedStatement> &statements,
                               const std::vector<geo::GeoRow> &geo,
                               const std::set<std::pair<std::string, int>> &anomalies,
                               DiagnosticSink &sink);

struct FilingRateRow {
    std::string scope; // "ALL" or a region name
    int year = 0;
    std::size_t n_eligible = 0;
    std::size_t n_filed = 0;   // filed eligible firm-years
    std::size_t n_imputed = 0; // imputed eligible firm-years
    std::optional<double> rate;
    std::optional<double> rate_with_imputed;
};

/// Filed-to-eligible ratios per year and per (region, year); groups without
/// eligible firms carry absent rates. Anomalous rows are excluded.
std::vector<FilingRateRow> filing_rate_report(const std::vector<PanelRow> &rows);

struct ArticulationShareRow {
    int year = 0;
    std::size_t n_filed = 0;
    std::size_t n_articulated = 0;
    std::optional<double> share;
    Money weighted_num = 0; // revenue of articulated filers
    Money weighted_den = 0; // revenue of all filers with positive revenue
    std::optional<double> weighted_share;
};

/// Plain and revenue-weighted articulated shares over filed statements,
/// anomalous rows excluded; zero or missing revenue weighs nothing.
std::vector<ArticulationShareRow> articulation_report(const std::vector<PanelRow> &rows);

/// User-supplied national aggregates, thousands of rubles.
struct ExternalAggregates {
    struct YearValues {
        std::optional<Money> gross_output;
        std::optional<Money> intermediate_consumption;
        std::optional<Money> gdp;
    };
    std::map<int, YearValues> years;

    static ExternalAggregates load(const std::filesystem::path &path);
};

struct AggregateRatioRow {
    int year = 0;
    Money revenue_sum = 0;
    Money materials_sum = 0;
    Money value_added_sum = 0;
    std::optional<double> revenue_ratio;       // vs gross output
    std::optional<double> materials_ratio;     // vs intermediate consumption
    std::optional<double> value_added_ratio;   // vs gdp
};

/// Sums of revenue, materials and value added over non-anomalous firms
/// reporting positive values, against the supplied denominators. Years
/// absent from the external file yield absent ratios with a diagnostic.
std::vector<AggregateRatioRow> aggregate_ratio_report(const std::vector<PanelRow> &rows,
                                                      const ExternalAggregates &external,
                                                      LineCode materials_code,
                                                      DiagnosticSink &sink);

void write_filing_rate_csv(const std::filesystem::path &path,
                           const std::vector<FilingRateRow> &rows);
void write_articulation_csv(const std::filesystem::path &path,
                            const std::vector<ArticulationShareRow> &rows);
void write_ratio_csv(const std::filesystem::path &path,
                     const std::vector<AggregateRatioRow> &rows);

/// Published column order: firm base info, eligibility, statement flags,
/// classification codes, location, then every published line code.
const std::vector<std::string> &export_columns();

/// One file per year (panel_<year>.csv) over the whole span, rows sorted by
/// inn, byte-identical across reruns. Years without rows still get their
/// partition with the full schema.
void export_panel(const std::vector<PanelRow> &rows, const std::filesystem::path &out_dir,
                  int span_start, int span_end);

/// Reads one exported partition back (used by tests).
std::vector<csv::Row> read_partition(const std::filesystem::path &path);

} // namespace finpanel::panel
