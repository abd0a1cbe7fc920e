#include "finpanel/synth.hpp"

#include "finpanel/articulate.hpp"
#include "finpanel/csv.hpp"
#include "finpanel/impute.hpp"
#include "finpanel/ingest.hpp"
#include "finpanel/util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

using namespace finpanel;

namespace {

namespace fs = std::filesystem;

synth::CorpusPlan small_plan() {
    synth::CorpusPlan plan;
    plan.n_firms = 120;
    plan.span_start = 2011;
    plan.span_end = 2023;
    plan.filing_rate = 0.7;
    plan.articulation_error_rate = 0.1;
    plan.duplicate_rate = 0.1;
    plan.anomaly_count = 2;
    plan.seed = 7;
    return plan;
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

std::map<std::string, std::string> tree_contents(const fs::path &root) {
    std::map<std::string, std::string> out;
    for (const auto &entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            out[fs::relative(entry.path(), root).string()] = slurp(entry.path());
        }
    }
    return out;
}

} // namespace

TEST_CASE("identical seeds produce byte-identical corpora") {
    const auto base = fs::temp_directory_path() / "finpanel_synth_test";
    fs::remove_all(base);
    auto plan = small_plan();
    synth::generate(plan, base / "a");
    synth::generate(plan, base / "b");
    CHECK(tree_contents(base / "a") == tree_contents(base / "b"));

    plan.seed = 8;
    synth::generate(plan, base / "c");
    CHECK(tree_contents(base / "a") != tree_contents(base / "c"));
}

TEST_CASE("generated statements articulate exactly unless an error was planted") {
    const auto dir = fs::temp_directory_path() / "finpanel_synth_test" / "clean";
    fs::remove_all(dir);
    auto plan = small_plan();
    plan.articulation_error_rate = 0.0;
    plan.anomaly_count = 0;
    synth::generate(plan, dir);

    DiagnosticSink sink;
    auto filings = ingest::ingest_directories(dir / "rosstat", dir / "fns", 1, sink);
    CHECK_FALSE(filings.empty());
    for (const auto &filing : filings) {
        HarmonizedStatement s = impute::statement_from_filing(filing);
        auto result = articulate::check_articulation(s);
        for (const auto &check : result.checks) {
            if (check.applicable) {
                CHECK_MESSAGE(check.discrepancy == 0,
                              filing.inn << " " << filing.year << " " << check.id);
            }
        }
    }
}

TEST_CASE("planted error counts match the manifest tallies") {
    const auto dir = fs::temp_directory_path() / "finpanel_synth_test" / "errors";
    fs::remove_all(dir);
    auto plan = small_plan();
    synth::generate(plan, dir);

    // manifest rates vs firm_years agree with each other
    auto rates = csv::read_all(dir / "manifest" / "rates.csv");
    auto firm_years = csv::read_all(dir / "manifest" / "firm_years.csv");
    std::map<int, std::size_t> errors_by_year;
    std::map<int, std::size_t> filed_by_year;
    std::map<int, std::size_t> eligible_by_year;
    for (std::size_t i = 1; i < firm_years.size(); ++i) {
        const auto &row = firm_years[i];
        const int year = static_cast<int>(*parse_int(row[1]));
        if (row[2] == "true") {
            ++eligible_by_year[year];
        }
        if (row[5] == "true") {
            ++filed_by_year[year];
            if (row[10] == "true") {
                ++errors_by_year[year];
            }
        }
    }
    for (std::size_t i = 1; i < rates.size(); ++i) {
        const auto &row = rates[i];
        const int year = static_cast<int>(*parse_int(row[0]));
        CHECK(eligible_by_year[year] == static_cast<std::size_t>(*parse_int(row[1])));
        CHECK(filed_by_year[year] == static_cast<std::size_t>(*parse_int(row[3])));
        CHECK(errors_by_year[year] == static_cast<std::size_t>(*parse_int(row[5])));
    }
}

TEST_CASE("prior columns of following filings carry the true values") {
    const auto dir = fs::temp_directory_path() / "finpanel_synth_test" / "priors";
    fs::remove_all(dir);
    auto plan = small_plan();
    plan.n_firms = 60;
    // perturbations touch what is filed, never the true values behind the
    // prior columns; drop them so filed == true here
    plan.articulation_error_rate = 0.0;
    plan.decoding_share = 0.0;
    plan.anomaly_count = 0;
    synth::generate(plan, dir);

    DiagnosticSink sink;
    auto filings = ingest::ingest_directories(dir / "rosstat", dir / "fns", 1, sink);
    auto index = impute::index_filings(filings);

    // whenever a firm filed in consecutive years, the later filing's
    // previous-year columns must repeat the earlier statement exactly over
    // the sections the provider format carries
    std::size_t checked = 0;
    for (const auto &filing : filings) {
        auto next = index.find({filing.inn, filing.year + 1});
        if (next == index.end() || next->second->prior1.empty()) {
            continue;
        }
        for (const auto &[code, value] : next->second->prior1) {
            auto current = get_line(filing.current, code);
            if (current) {
                CHECK(*current == value);
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("the tabular era carries no filed zeros, the xml era does") {
    const auto dir = fs::temp_directory_path() / "finpanel_synth_test" / "zeros";
    fs::remove_all(dir);
    synth::generate(small_plan(), dir);
    DiagnosticSink sink;
    auto filings = ingest::ingest_directories(dir / "rosstat", dir / "fns", 1, sink);
    std::size_t fns_zeros = 0;
    for (const auto &filing : filings) {
        for (const auto &lines : {filing.current, filing.prior1, filing.prior2}) {
            for (const auto &[code, value] : lines) {
                if (filing.provider == Provider::kRosstat) {
                    CHECK(value != 0);
                } else if (value == 0) {
                    ++fns_zeros;
                }
            }
        }
    }
    CHECK(fns_zeros > 0);
}

TEST_CASE("plans are validated") {
    synth::CorpusPlan bad;
    bad.filing_rate = 1.5;
    CHECK_THROWS_AS(bad.validate(), PipelineError);
    synth::CorpusPlan span;
    span.span_start = 2009;
    CHECK_THROWS_AS(span.validate(), PipelineError);
    CHECK_NOTHROW(small_plan().validate());
}
