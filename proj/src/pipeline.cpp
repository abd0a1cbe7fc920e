#include "finpanel/pipeline.hpp"

#include "finpanel/anomaly.hpp"
#include "finpanel/articulate.hpp"
#include "finpanel/csv.hpp"
#include "finpanel/eligibility.hpp"
#include "finpanel/geocode.hpp"
#include "finpanel/impute.hpp"
#include "finpanel/ingest.hpp"
#include "finpanel/panel.hpp"
#include "finpanel/registry_ingest.hpp"
#include "finpanel/statements_io.hpp"
#include "finpanel/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>

namespace finpanel::pipeline {

const char *kGeocoderUrlEnvVar = "FINPANEL_GEOCODER_URL";

void Config::validate() const {
    if (span_start < 2011 || span_end > 2023 || span_start > span_end) {
        throw PipelineError("CONFIG_INVALID", "span must lie within 2011-2023");
    }
    if (workers < 1) {
        throw PipelineError("CONFIG_INVALID", "workers must be at least 1");
    }
    if (cell_size_km <= 0) {
        throw PipelineError("CONFIG_INVALID", "cell_size_km must be positive");
    }
    if (!LineCode::parse(materials_code)) {
        throw PipelineError("CONFIG_INVALID", "materials_code '" + materials_code +
                                                  "' is not a known line code");
    }
    if (n_top < 1) {
        throw PipelineError("CONFIG_INVALID", "n_top must be at least 1");
    }
}

void apply_override(Config &config, const std::string &key, const std::string &value) {
    auto as_int = [&](int &target) {
        auto v = parse_int(value);
        if (!v) {
            throw PipelineError("CONFIG_INVALID", "bad integer for " + key + ": " + value);
        }
        target = static_cast<int>(*v);
    };
    if (key == "span_start") {
        as_int(config.span_start);
    } else if (key == "span_end") {
        as_int(config.span_end);
    } else if (key == "workers") {
        as_int(config.workers);
    } else if (key == "out_dir") {
        config.out_dir = value;
    } else if (key == "snapshots_dir") {
        config.snapshots_dir = value;
    } else if (key == "rosstat_dir") {
        config.rosstat_dir = value;
    } else if (key == "fns_dir") {
        config.fns_dir = value;
    } else if (key == "okved_map") {
        config.okved_map = value;
    } else if (key == "okopf_map") {
        config.okopf_map = value;
    } else if (key == "exemption_sets") {
        config.exemption_sets = value;
    } else if (key == "financial_register") {
        config.financial_register = value;
    } else if (key == "exclusions") {
        config.exclusions = value;
    } else if (key == "external_aggregates") {
        config.external_aggregates = value;
    } else if (key == "geocoder_url") {
        config.geocoder_url = value;
    } else if (key == "geocode_cache") {
        config.geocode_cache = value;
    } else if (key == "cell_size_km") {
        try {
            config.cell_size_km = std::stod(value);
        } catch (const std::exception &) {
            throw PipelineError("CONFIG_INVALID", "bad number for cell_size_km: " + value);
        }
    } else if (key == "materials_code") {
        config.materials_code = value;
    } else if (key == "n_top") {
        as_int(config.n_top);
    } else if (key == "geocode_max_in_flight") {
        as_int(config.geocode_max_in_flight);
    } else if (key == "geocode_retries") {
        as_int(config.geocode_retries);
    } else if (key == "geocode_retry_delay_ms") {
        as_int(config.geocode_retry_delay_ms);
    } else {
        throw PipelineError("CONFIG_INVALID", "unknown config key '" + key + "'");
    }
}

Config load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw PipelineError("CONFIG_INVALID", "cannot open config " + path.string());
    }
    Config config;
    const std::filesystem::path base = path.parent_path();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw PipelineError("CONFIG_INVALID", path.string() + ":" +
                                                      std::to_string(line_no) +
                                                      " expected key = value");
        }
        apply_override(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    // resolve relative paths against the config file location
    auto resolve = [&base](std::filesystem::path &p) {
        if (!p.empty() && p.is_relative() && !base.empty()) {
            p = base / p;
        }
    };
    resolve(config.out_dir);
    resolve(config.snapshots_dir);
    resolve(config.rosstat_dir);
    resolve(config.fns_dir);
    resolve(config.okved_map);
    resolve(config.okopf_map);
    resolve(config.exemption_sets);
    resolve(config.financial_register);
    resolve(config.exclusions);
    resolve(config.external_aggregates);
    resolve(config.geocode_cache);
    return config;
}

namespace {

void require_file(const std::filesystem::path &path, const char *what, const char *kind) {
    if (path.empty()) {
        throw PipelineError("CONFIG_INVALID", std::string(what) + " path not configured");
    }
    if (!std::filesystem::exists(path)) {
        throw PipelineError(kind, std::string(what) + " not found: " + path.string());
    }
}

void write_diagnostics(const Config &config, const char *stage,
                       const DiagnosticSink &sink) {
    sink.write_csv(config.out_dir / (std::string(stage) + "_diagnostics.csv"));
}

} // namespace

void run_build_universe(const Config &config) {
    config.validate();
    require_file(config.snapshots_dir, "snapshots_dir", "MISSING_INPUT");
    DiagnosticSink sink;
    std::vector<registry::RegistrySnapshot> snapshots;
    std::vector<std::filesystem::path> files;
    for (const auto &entry : std::filesystem::directory_iterator(config.snapshots_dir)) {
        if (entry.path().extension() == ".xml") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw PipelineError("MISSING_INPUT",
                            "no snapshot files under " + config.snapshots_dir.string());
    }
    snapshots.reserve(files.size());
    for (const auto &file : files) {
        snapshots.push_back(registry::parse_snapshot(file, sink));
    }
    auto universe = registry::build_universe(snapshots, config.span_start, config.span_end);

    registry::CorrespondenceTable okved_table;
    registry::CorrespondenceTable okopf_table;
    if (!config.okved_map.empty()) {
        require_file(config.okved_map, "okved_map", "MISSING_INPUT");
        okved_table = registry::load_correspondence(config.okved_map);
    }
    if (!config.okopf_map.empty()) {
        require_file(config.okopf_map, "okopf_map", "MISSING_INPUT");
        okopf_table = registry::load_correspondence(config.okopf_map);
    }
    for (auto &record : universe) {
        registry::harmonize_codes(record, okved_table, okopf_table);
        if (record.okved_unmapped || record.okopf_unmapped) {
            sink.add(Severity::kWarning, "UNMAPPED_CODE",
                     std::string("old classifier code preserved: ") +
                         (record.okved_unmapped ? record.okved : record.okopf),
                     record.inn, record.year);
        }
    }
    registry::impute_missing_codes(universe);
    registry::write_universe_csv(config.universe_csv(), universe);
    write_diagnostics(config, "build_universe", sink);
}

void run_classify(const Config &config) {
    config.validate();
    if (config.exemption_sets.empty()) {
        throw PipelineError("CONFIG_INVALID", "exemption_sets path not configured");
    }
    require_file(config.exemption_sets, "exemption_sets", "MISSING_INPUT");
    require_file(config.universe_csv(), "universe.csv", "MISSING_INPUT");
    auto sets = eligibility::ExemptionSets::load(config.exemption_sets);
    eligibility::FinancialRegister financial;
    if (!config.financial_register.empty()) {
        require_file(config.financial_register, "financial_register", "MISSING_INPUT");
        financial = eligibility::FinancialRegister::load(config.financial_register);
    }
    auto universe = registry::read_universe_csv(config.universe_csv());
    DiagnosticSink sink;
    auto table = eligibility::eligibility_table(universe, sets, financial, sink);
    eligibility::write_eligibility_csv(config.eligibility_csv(), table.rows);
    eligibility::write_summary_csv(config.eligibility_summary_csv(), table.summary);
    write_diagnostics(config, "classify", sink);
}

void run_ingest(const Config &config) {
    config.validate();
    DiagnosticSink sink;
    auto filings =
        ingest::ingest_directories(config.rosstat_dir, config.fns_dir, config.workers, sink);
    ingest::write_filings_csv(config.filings_csv(), filings);
    write_diagnostics(config, "ingest", sink);
}

void run_impute(const Config &config) {
    config.validate();
    require_file(config.filings_csv(), "filings.csv", "MISSING_INPUT");
    require_file(config.universe_csv(), "universe.csv", "MISSING_INPUT");
    auto filings = ingest::read_filings_csv(config.filings_csv());
    auto universe = registry::read_universe_csv(config.universe_csv());
    auto result = impute::impute_pass(filings, universe, config.workers);
    write_statements_csv(config.statements_csv(), result.statements);
    impute::write_imputation_report(config.imputation_report_csv(), result.report);
}

void run_articulate(const Config &config) {
    config.validate();
    require_file(config.statements_csv(), "statements.csv", "MISSING_INPUT");
    auto statements = read_statements_csv(config.statements_csv());

    struct CheckRow {
        std::string pre_failed; // failing equation ids, |-joined
        bool pre = false;
        bool post = false;
    };
    std::vector<CheckRow> checks(statements.size());
    parallel_chunks(statements.size(), config.workers,
                    [&](std::size_t begin, std::size_t end) {
                        for (std::size_t i = begin; i < end; ++i) {
                            auto &stmt = statements[i];
                            auto pre = articulate::check_articulation(stmt);
                            stmt.articulated = pre.articulated;
                            articulate::adjust_totals(stmt);
                            auto post = articulate::check_articulation(stmt);
                            checks[i].pre = pre.articulated;
                            checks[i].post = post.articulated;
                            for (const auto &c : pre.checks) {
                                if (c.applicable && !c.pass) {
                                    if (!checks[i].pre_failed.empty()) {
                                        checks[i].pre_failed += "|";
                                    }
                                    checks[i].pre_failed += c.id;
                                }
                            }
                        }
                    });
    write_statements_csv(config.statements_articulated_csv(), statements);
    csv::Writer out(config.articulation_checks_csv());
    out.write({"inn", "year", "articulated_pre", "articulated_post", "totals_adjustment",
               "failed_equations"});
    for (std::size_t i = 0; i < statements.size(); ++i) {
        out.write({statements[i].inn, std::to_string(statements[i].year),
                   checks[i].pre ? "true" : "false", checks[i].post ? "true" : "false",
                   statements[i].totals_adjustment ? "true" : "false",
                   checks[i].pre_failed});
    }
    out.close();
}

void run_flag_anomalies(const Config &config) {
    config.validate();
    require_file(config.statements_articulated_csv(), "statements_articulated.csv",
                 "MISSING_INPUT");
    require_file(config.universe_csv(), "universe.csv", "MISSING_INPUT");
    require_file(config.eligibility_csv(), "eligibility.csv", "MISSING_INPUT");
    auto statements = read_statements_csv(config.statements_articulated_csv());
    auto universe = registry::read_universe_csv(config.universe_csv());
    auto eligibility_rows = eligibility::read_eligibility_csv(config.eligibility_csv());

    std::map<std::pair<std::string, int>, std::string> okved_by_key;
    for (const auto &record : universe) {
        okved_by_key[{record.inn, record.year}] = record.okved;
    }
    std::map<std::pair<std::string, int>, bool> financial_by_key;
    for (const auto &row : eligibility_rows) {
        financial_by_key[{row.inn, row.year}] = row.financial;
    }
    std::vector<anomaly::StatementContext> contexts;
    contexts.reserve(statements.size());
    std::set<std::pair<std::string, int>> statement_keys;
    for (const auto &stmt : statements) {
        anomaly::StatementContext ctx;
        ctx.statement = &stmt;
        auto okved_it = okved_by_key.find({stmt.inn, stmt.year});
        if (okved_it != okved_by_key.end()) {
            ctx.okved = okved_it->second;
        }
        auto fin_it = financial_by_key.find({stmt.inn, stmt.year});
        ctx.financial = fin_it != financial_by_key.end() && fin_it->second;
        contexts.push_back(ctx);
        statement_keys.insert({stmt.inn, stmt.year});
    }
    auto queue = anomaly::review_queue(contexts, config.n_top);
    anomaly::write_queue_csv(config.review_queue_csv(), queue);

    DiagnosticSink sink;
    std::set<std::pair<std::string, int>> matched;
    if (!config.exclusions.empty()) {
        require_file(config.exclusions, "exclusions", "MISSING_INPUT");
        auto exclusions = anomaly::load_exclusions(config.exclusions);
        matched = anomaly::match_exclusions(statement_keys, exclusions, sink);
    }
    anomaly::write_anomalies_csv(config.anomalies_csv(), matched);
    write_diagnostics(config, "flag_anomalies", sink);
}

void run_geocode(const Config &config) {
    config.validate();
    require_file(config.universe_csv(), "universe.csv", "MISSING_INPUT");
    std::string url = config.geocoder_url;
    if (url.empty()) {
        if (const char *env = std::getenv(kGeocoderUrlEnvVar)) {
            url = env;
        }
    }
    if (url.empty()) {
        throw PipelineError("CONFIG_INVALID",
                            std::string("geocoder_url not configured (flag, config, or $") +
                                kGeocoderUrlEnvVar + ")");
    }
    auto universe = registry::read_universe_csv(config.universe_csv());
    geo::GeocodeCache cache(config.geocode_cache);
    geo::HttpGeocodeClient client(url);
    DiagnosticSink sink;
    geo::CascadeOptions options;
    options.retries = config.geocode_retries;
    options.retry_delay_ms = config.geocode_retry_delay_ms;
    auto rows = geo::geocode_universe(universe, client, cache, config.geocode_max_in_flight,
                                      sink, options);
    geo::write_geo_csv(config.geo_csv(), rows);
    if (!config.geocode_cache.empty()) {
        cache.save(config.geocode_cache);
    }
    write_diagnostics(config, "geocode", sink);
}

namespace {

std::vector<PanelRow> assemble_rows(const Config &config, DiagnosticSink &sink) {
    require_file(config.universe_csv(), "universe.csv", "MISSING_INPUT");
    require_file(config.eligibility_csv(), "eligibility.csv", "MISSING_INPUT");
    require_file(config.statements_articulated_csv(), "statements_articulated.csv",
                 "MISSING_INPUT");
    auto universe = registry::read_universe_csv(config.universe_csv());
    auto eligibility_rows = eligibility::read_eligibility_csv(config.eligibility_csv());
    auto statements = read_statements_csv(config.statements_articulated_csv());
    std::vector<geo::GeoRow> geo_rows;
    if (std::filesystem::exists(config.geo_csv())) {
        geo_rows = geo::read_geo_csv(config.geo_csv());
    }
    std::set<std::pair<std::string, int>> anomalies;
    if (std::filesystem::exists(config.anomalies_csv())) {
        anomalies = anomaly::read_anomalies_csv(config.anomalies_csv());
    }
    return panel::assemble(universe, eligibility_rows, statements, geo_rows, anomalies, sink);
}

} // namespace

void run_assemble(const Config &config) {
    config.validate();
    DiagnosticSink sink;
    auto rows = assemble_rows(config, sink);
    panel::export_panel(rows, config.panel_dir(), config.span_start, config.span_end);
    write_diagnostics(config, "assemble", sink);
}

void run_report(const Config &config) {
    config.validate();
    DiagnosticSink sink;
    auto rows = assemble_rows(config, sink);
    std::filesystem::create_directories(config.reports_dir());
    panel::write_filing_rate_csv(config.reports_dir() / "filing_rate.csv",
                                 panel::filing_rate_report(rows));
    panel::write_articulation_csv(config.reports_dir() / "articulation_shares.csv",
                                  panel::articulation_report(rows));
    if (!config.external_aggregates.empty()) {
        require_file(config.external_aggregates, "external_aggregates", "MISSING_INPUT");
        auto external = panel::ExternalAggregates::load(config.external_aggregates);
        panel::write_ratio_csv(
            config.reports_dir() / "aggregate_ratios.csv",
            panel::aggregate_ratio_report(rows, external,
                                          LineCode::of(config.materials_code), sink));
    }
    geo::write_quality_csv(config.reports_dir() / "geocode_quality.csv",
                           geo::quality_report(rows));
    geo::GridConfig grid_config;
    grid_config.cell_size_km = config.cell_size_km;
    grid_config.materials_code = LineCode::of(config.materials_code);
    for (int year = config.span_start; year <= config.span_end; ++year) {
        std::vector<PanelRow> usable;
        for (const auto &row : rows) {
            if (row.firm.year == year && !row.anomalous) {
                usable.push_back(row);
            }
        }
        auto cells = geo::grid_aggregate(usable, year, grid_config);
        if (!cells.empty()) {
            geo::write_grid_csv(config.reports_dir() /
                                    ("grid_" + std::to_string(year) + ".csv"),
                                cells, config.cell_size_km);
        }
    }
    write_diagnostics(config, "report", sink);
}

void run_all(const Config &config) {
    run_build_universe(config);
    run_classify(config);
    run_ingest(config);
    run_impute(config);
    run_articulate(config);
    run_flag_anomalies(config);
    if (!config.geocoder_url.empty() || std::getenv(kGeocoderUrlEnvVar) != nullptr) {
        run_geocode(config);
    }
    run_assemble(config);
    run_report(config);
}

std::vector<std::string> stage_plan() {
    return {"build-universe", "classify",  "ingest",   "impute", "articulate",
            "flag-anomalies", "geocode",   "assemble", "report"};
}

} // namespace finpanel::pipeline
