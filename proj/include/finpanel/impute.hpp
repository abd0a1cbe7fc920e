#pragma once

#include "finpanel/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finpanel::impute {

using FilingsIndex = std::map<std::pair<std::string, int>, const RawFiling *>;

FilingsIndex index_filings(const std::vector<RawFiling> &filings);

/// Reconstructs the statement for (inn, year) from the prior-period columns
/// of the following filings: the year+1 filing's previous-year columns, or,
/// only when no year+1 filing exists, the year+2 filing's two-years-prior
/// balance-sheet columns. Returns nullopt when neither source exists (or a
/// filing for the year itself does — existing statements are never touched).
std::optional<HarmonizedStatement> reconstruct(const std::string &inn, int year,
                                               const FilingsIndex &index);

/// Statement as filed: the deduped filing's current-period lines.
HarmonizedStatement statement_from_filing(const RawFiling &filing);

struct ImputationYearReport {
    int year = 0;
    std::size_t n_gaps = 0;
    std::size_t n_imputed_t1 = 0;
    std::size_t n_imputed_t2 = 0;
};

struct ImputeResult {
    // filed statements pass through untouched; imputed ones are added;
    // sorted by (inn, year)
    std::vector<HarmonizedStatement> statements;
    std::vector<ImputationYearReport> report;
};

/// Fills every reconstructable gap: universe firm-years with no deduped
/// filing. A second pass adds zero rows.
ImputeResult impute_pass(const std::vector<RawFiling> &filings,
                         const std::vector<FirmRecord> &universe, int workers);

void write_imputation_report(const std::filesystem::path &path,
                             const std::vector<ImputationYearReport> &report);

} // namespace finpanel::impute
