#pragma once

#include "finpanel/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace finpanel::pipeline {

/// Everything the stages need; loaded from a key=value config file with
/// flag overrides on top. Relative paths in a config file resolve against
/// the file's directory.
struct Config {
    int span_start = 2011;
    int span_end = 2023;
    int workers = 1;
    std::filesystem::path out_dir = "out";
    std::filesystem::path snapshots_dir;
    std::filesystem::path rosstat_dir;
    std::filesystem::path fns_dir;
    std::filesystem::path okved_map;
    std::filesystem::path okopf_map;
    std::filesystem::path exemption_sets;
    std::filesystem::path financial_register;
    std::filesystem::path exclusions;
    std::filesystem::path external_aggregates;
    std::string geocoder_url;
    std::filesystem::path geocode_cache;
    double cell_size_km = 1.0;
    std::string materials_code = "4121";
    int n_top = 20;
    int geocode_max_in_flight = 4;
    int geocode_retries = 3;
    int geocode_retry_delay_ms = 50;

    void validate() const; // CONFIG_INVALID on bad spans or counts

    // derived intermediate paths
    std::filesystem::path universe_csv() const { return out_dir / "universe.csv"; }
    std::filesystem::path eligibility_csv() const { return out_dir / "eligibility.csv"; }
    std::filesystem::path eligibility_summary_csv() const {
        return out_dir / "eligibility_summary.csv";
    }
    std::filesystem::path filings_csv() const { return out_dir / "filings.csv"; }
    std::filesystem::path statements_csv() const { return out_dir / "statements.csv"; }
    std::filesystem::path statements_articulated_csv() const {
        return out_dir / "statements_articulated.csv";
    }
    std::filesystem::path articulation_checks_csv() const {
        return out_dir / "articulation_checks.csv";
    }
    std::filesystem::path imputation_report_csv() const {
        return out_dir / "imputation_report.csv";
    }
    std::filesystem::path anomalies_csv() const { return out_dir / "anomalies.csv"; }
    std::filesystem::path review_queue_csv() const { return out_dir / "review_queue.csv"; }
    std::filesystem::path geo_csv() const { return out_dir / "geo.csv"; }
    std::filesystem::path panel_dir() const { return out_dir / "panel"; }
    std::filesystem::path reports_dir() const { return out_dir / "reports"; }
};

/// Parses the documented key=value format (hash comments, blank lines).
/// Unknown keys are CONFIG_INVALID.
Config load_config(const std::filesystem::path &path);

/// Applies one "key=value" override; same keys as the config file.
void apply_override(Config &config, const std::string &key, const std::string &value);

/// The geocoder URL may come from the environment when no flag is given.
extern const char *kGeocoderUrlEnvVar;

void run_build_universe(const Config &config);
void run_classify(const Config &config);
void run_ingest(const Config &config);
void run_impute(const Config &config);
void run_articulate(const Config &config);
void run_flag_anomalies(const Config &config);
void run_geocode(const Config &config);
void run_assemble(const Config &config);
void run_report(const Config &config);
void run_all(const Config &config);

/// Stage names in run order, for --dry-run.
std::vector<std::string> stage_plan();

} // namespace finpanel::pipeline
