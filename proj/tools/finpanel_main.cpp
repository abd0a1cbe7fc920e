#include "finpanel/pipeline.hpp"
#include "finpanel/synth.hpp"
#include "finpanel/util.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>

namespace {

struct StageArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    bool dry_run = false;
};

void add_stage_options(CLI::App *cmd, StageArgs &args) {
    cmd->add_option("--config", args.config_path, "key=value config file");
    cmd->add_option("--set", args.overrides,
                    "config override as key=value (repeatable, wins over --config)");
}

finpanel::pipeline::Config resolve_config(const StageArgs &args) {
    finpanel::pipeline::Config config;
    if (!args.config_path.empty()) {
        config = finpanel::pipeline::load_config(args.config_path);
    }
    for (const auto &override_kv : args.overrides) {
        const auto eq = override_kv.find('=');
        if (eq == std::string::npos) {
            throw finpanel::PipelineError("CONFIG_INVALID",
                                          "--set expects key=value, got '" + override_kv +
                                              "'");
        }
        finpanel::pipeline::apply_override(config,
                                           finpanel::trim(override_kv.substr(0, eq)),
                                           finpanel::trim(override_kv.substr(eq + 1)));
    }
    return config;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"firm-registry and financial-statement panel builder"};
    app.require_subcommand(1);

    StageArgs stage_args;
    using RunFn = std::function<void(const finpanel::pipeline::Config &)>;
    const std::vector<std::pair<std::string, RunFn>> stages = {
        {"build-universe", finpanel::pipeline::run_build_universe},
        {"classify", finpanel::pipeline::run_classify},
        {"ingest", finpanel::pipeline::run_ingest},
        {"impute", finpanel::pipeline::run_impute},
        {"articulate", finpanel::pipeline::run_articulate},
        {"flag-anomalies", finpanel::pipeline::run_flag_anomalies},
        {"geocode", finpanel::pipeline::run_geocode},
        {"assemble", finpanel::pipeline::run_assemble},
        {"report", finpanel::pipeline::run_report},
    };

    RunFn selected;
    for (const auto &[name, fn] : stages) {
        CLI::App *cmd = app.add_subcommand(
            name, "run the " + name + " stage against the configured inputs");
        add_stage_options(cmd, stage_args);
        cmd->callback([&selected, fn = fn] { selected = fn; });
    }

    CLI::App *run_all_cmd =
        app.add_subcommand("run-all", "run every stage in order on one config");
    add_stage_options(run_all_cmd, stage_args);
    run_all_cmd->add_flag("--dry-run", stage_args.dry_run,
                          "print the stage plan without running anything");
    run_all_cmd->callback([&selected, &stage_args] {
        if (stage_args.dry_run) {
            selected = [](const finpanel::pipeline::Config &) {
                for (const auto &stage : finpanel::pipeline::stage_plan()) {
                    std::puts(stage.c_str());
                }
            };
        } else {
            selected = finpanel::pipeline::run_all;
        }
    });

    finpanel::synth::CorpusPlan plan;
    std::string corpus_dir = "corpus";
    CLI::App *gen = app.add_subcommand(
        "gen-corpus", "generate a synthetic fixture corpus with a ground-truth manifest");
    gen->add_option("--out", corpus_dir, "corpus output directory");
    gen->add_option("--n-firms", plan.n_firms, "number of firms");
    gen->add_option("--span-start", plan.span_start, "first panel year");
    gen->add_option("--span-end", plan.span_end, "last panel year");
    gen->add_option("--filing-rate", plan.filing_rate, "target filing rate per year");
    gen->add_option("--articulation-error-rate", plan.articulation_error_rate,
                    "share of filed statements with a broken summary line");
    gen->add_option("--duplicate-rate", plan.duplicate_rate,
                    "share of 2019+ filings with adjusted refilings");
    gen->add_option("--anomaly-count", plan.anomaly_count,
                    "number of implausible filings to plant and list for exclusion");
    gen->add_option("--seed", plan.seed, "corpus seed");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) {
            auto summary = finpanel::synth::generate(plan, corpus_dir);
            std::printf("corpus written to %s\n", corpus_dir.c_str());
            std::printf("  universe rows:      %zu\n", summary.n_universe_rows);
            std::printf("  eligible firm-years: %zu\n", summary.n_eligible_firm_years);
            std::printf("  filed (eligible):   %zu\n", summary.n_filed_eligible);
            std::printf("  non-eligible filers: %zu\n", summary.n_noneligible_filers);
            std::printf("  gaps / t+1 / t+2:   %zu / %zu / %zu\n", summary.n_gaps,
                        summary.n_recoverable_t1, summary.n_recoverable_t2);
            return 0;
        }
        if (selected) {
            selected(resolve_config(stage_args));
        }
        return 0;
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    } catch (const finpanel::PipelineError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
