#include "finpanel/impute.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/ingest.hpp"
#include "finpanel/util.hpp"

#include <algorithm>

namespace finpanel::impute {

FilingsIndex index_filings(const std::vector<RawFiling> &filings) {
    FilingsIndex index;
    for (const auto &f : filings) {
        index[{f.inn, f.year}] = &f;
    }
    return index;
}

HarmonizedStatement statement_from_filing(const RawFiling &filing) {
    HarmonizedStatement s;
    s.inn = filing.inn;
    s.year = filing.year;
    s.form = filing.form;
    s.lines = filing.current;
    s.simplified = filing.form == Form::kSimplified;
    return s;
}

std::optional<HarmonizedStatement> reconstruct(const std::string &inn, int year,
                                               const FilingsIndex &index) {
    if (index.count({inn, year}) > 0) {
        return std::nullopt; // filed; never overwritten
    }
    const RawFiling *source = nullptr;
    const LineValues *columns = nullptr;
    auto t1 = index.find({inn, year + 1});
    if (t1 != index.end()) {
        source = t1->second;
        columns = &source->prior1;
    } else {
        auto t2 = index.find({inn, year + 2});
        if (t2 != index.end()) {
            source = t2->second;
            columns = &source->prior2; // balance-sheet columns only
        }
    }
    if (!source || columns->empty()) {
        return std::nullopt;
    }
    HarmonizedStatement s;
    s.inn = inn;
    s.year = year;
    s.form = source->form;
    s.lines = *columns;
    s.imputed = true;
    s.imputation_source_year = source->year;
    s.simplified = source->form == Form::kSimplified;
    ingest::consolidate_tax_lines(s.lines, year);
    return s;
}

ImputeResult impute_pass(const std::vector<RawFiling> &filings,
                         const std::vector<FirmRecord> &universe, int workers) {
    const FilingsIndex index = index_filings(filings);

    // gap candidates: universe firm-years without a filing
    std::vector<const FirmRecord *> gaps;
    for (const auto &record : universe) {
        if (index.count({record.inn, record.year}) == 0) {
            gaps.push_back(&record);
        }
    }

    std::vector<std::optional<HarmonizedStatement>> reconstructed(gaps.size());
    parallel_chunks(gaps.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            reconstructed[i] = reconstruct(gaps[i]->inn, gaps[i]->year, index);
        }
    });

    ImputeResult result;
    std::map<int, ImputationYearReport> report;
    for (const auto &f : filings) {
        result.statements.push_back(statement_from_filing(f));
    }
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        auto &r = report[gaps[i]->year];
        r.year = gaps[i]->year;
        ++r.n_gaps;
        if (reconstructed[i]) {
            if (*reconstructed[i]->imputation_source_year == gaps[i]->year + 1) {
                ++r.n_imputed_t1;
            } else {
                ++r.n_imputed_t2;
            }
            result.statements.push_back(std::move(*reconstructed[i]));
        }
    }
    std::sort(result.statements.begin(), result.statements.end(),
              [](const HarmonizedStatement &a, const HarmonizedStatement &b) {
                  return std::tie(a.inn, a.year) < std::tie(b.inn, b.year);
              });
    for (const auto &[year, r] : report) {
        result.report.push_back(r);
    }
    return result;
}

void write_imputation_report(const std::filesystem::path &path,
                             const std::vector<ImputationYearReport> &report) {
    csv::Writer out(path);
    out.write({"year", "n_gaps", "n_imputed_t1", "n_imputed_t2"});
    for (const auto &r : report) {
        out.write({std::to_string(r.year), std::to_string(r.n_gaps),
                   std::to_string(r.n_imputed_t1), std::to_string(r.n_imputed_t2)});
    }
    out.close();
}

} // namespace finpanel::impute
