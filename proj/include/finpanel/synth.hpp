#pragma once

#include "finpanel/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace finpanel::synth {

/// Knobs of the fixture corpus. Identical seed and knobs produce a
/// byte-identical corpus.
struct CorpusPlan {
    int n_firms = 1000;
    int span_start = 2011;
    int span_end = 2023;
    double filing_rate = 0.7;              // per year, among eligible firm-years
    double articulation_error_rate = 0.05; // among filed statements per year
    double duplicate_rate = 0.05;          // adjusted filings, 2019+ only
    double unit_rubles_share = 0.1;        // remainder files in thousands
    double unit_millions_share = 0.1;
    double government_share = 0.05;
    double religious_share = 0.02;
    double financial_share = 0.03;
    double ineligible_filer_rate = 0.1; // filing among non-eligible firm-years
    double decoding_share = 0.2;        // optional lines, 2019+ full-form filings
    int anomaly_count = 0;              // implausible filings, listed for exclusion
    std::uint64_t seed = 1;

    void validate() const; // throws CONFIG_INVALID
};

struct GenerateSummary {
    std::size_t n_universe_rows = 0;
    std::size_t n_eligible_firm_years = 0;
    std::size_t n_filed_eligible = 0;
    std::size_t n_noneligible_filers = 0;
    std::size_t n_gaps = 0;
    std::size_t n_recoverable_t1 = 0;
    std::size_t n_recoverable_t2 = 0;
    std::size_t n_duplicates = 0;
    std::size_t n_articulation_errors = 0;
    std::size_t n_anomalies = 0;
};

/// Writes registry snapshots, statement fixtures in both provider formats,
/// config tables, the stub geoservice database, a ready pipeline.conf, and
/// the ground-truth manifest under `dir`:
///   registry/   rosstat/   fns/   config/   manifest/   pipeline.conf
GenerateSummary generate(const CorpusPlan &plan, const std::filesystem::path &dir);

} // namespace finpanel::synth
