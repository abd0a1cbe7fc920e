#pragma once

#include "finpanel/diagnostics.hpp"
#include "finpanel/types.hpp"
#include "finpanel/xml.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace finpanel::ingest {

/// Parses one provider XML document (2019+ era). Absent elements stay
/// missing; present elements, including zeros, are present values. Returns
/// nullopt after a MALFORMED_DOCUMENT diagnostic.
std::optional<RawFiling> parse_fns_xml(const xml::Node &doc, DiagnosticSink &sink);
std::optional<RawFiling> parse_fns_xml(std::string_view text, DiagnosticSink &sink);

/// Serializes a filing back to the fixture schema (used by the corpus
/// generator; parse(write(f)) == f).
std::string write_fns_xml(const RawFiling &filing);

/// Parses one provider CSV (2012-2018 era): one firm per row, header names
/// the line-code columns with _p1/_p2 suffixes for prior periods. Every
/// zero cell becomes missing. Malformed rows are skipped with diagnostics.
std::vector<RawFiling> parse_rosstat_csv(const std::filesystem::path &path, int year,
                                         DiagnosticSink &sink);

/// Column layout for the tabular era, shared by writer and generator.
struct RosstatColumn {
    LineCode code;
    int period; // 0 current, 1 prior1, 2 prior2
};

std::vector<std::string> rosstat_header(const std::vector<RosstatColumn> &columns);
void write_rosstat_csv(const std::filesystem::path &path,
                       const std::vector<RosstatColumn> &columns,
                       const std::vector<RawFiling> &filings);

/// Filing deadline stand-in for the tabular provider, which carries no
/// submission dates.
Date rosstat_submission_date(int year);

/// Converts all values to thousands of rubles (rubles round half away from
/// zero) and marks the filing as such.
void normalize_units(RawFiling &filing);

/// Folds parsed decoding lines into the x-suffix sums for the cash-flow and
/// equity-change parents; decodings of other sections are dropped.
void aggregate_decodings(RawFiling &filing);

/// 2020+ filings with new-form tax detail lines get line 2410 recomputed as
/// 2411 + 2412; 2019 and earlier are left untouched.
void consolidate_tax_lines(LineValues &lines, int year);

/// normalize_units + aggregate_decodings + consolidate_tax_lines.
void harmonize_filing(RawFiling &filing);

/// Stable digest of a filing's content for deterministic tie-breaks.
std::uint64_t content_hash(const RawFiling &filing);

/// Keeps the filing with the latest submission date; ties go to the larger
/// content hash. Throws EMPTY_GROUP on an empty input.
RawFiling dedupe_filings(const std::vector<RawFiling> &group);

/// Reads both provider trees, harmonizes and dedupes, returns filings
/// sorted by (inn, year). Throws MISSING_INPUT when no input file matches.
std::vector<RawFiling> ingest_directories(const std::filesystem::path &rosstat_dir,
                                          const std::filesystem::path &fns_dir,
                                          int workers, DiagnosticSink &sink);

/// Packed line-value text: "code:value;code:value" in registry order.
std::string pack_lines(const LineValues &lines);
LineValues unpack_lines(std::string_view packed);

void write_filings_csv(const std::filesystem::path &path,
                       const std::vector<RawFiling> &filings);
std::vector<RawFiling> read_filings_csv(const std::filesystem::path &path);

} // namespace finpanel::ingest
