#include "finpanel/eligibility.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"

#include <algorithm>

namespace finpanel::eligibility {

ExemptionSets ExemptionSets::load(const std::filesystem::path &path) {
    ExemptionSets sets;
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 3) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        auto criterion = parse_exempt_criteria(row[0]);
        if (!criterion) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": unknown criterion '" + row[0] + "'");
        }
        sets.add(*criterion, row[1], row[2]);
    }
    return sets;
}

void ExemptionSets::add(ExemptCriteria criterion, const std::string &code_kind,
                        const std::string &code) {
    sets_[criterion][code_kind].insert(code);
}

bool ExemptionSets::matches(ExemptCriteria criterion, const FirmRecord &record) const {
    auto it = sets_.find(criterion);
    if (it == sets_.end()) {
        return false;
    }
    for (const auto &[kind, codes] : it->second) {
        const std::string *value = nullptr;
        if (kind == "okopf") {
            value = &record.okopf;
        } else if (kind == "okfs") {
            value = &record.okfs;
        } else if (kind == "okogu") {
            value = &record.okogu;
        }
        if (value && !value->empty() && codes.count(*value) > 0) {
            return true;
        }
    }
    return false;
}

FinancialRegister FinancialRegister::load(const std::filesystem::path &path) {
    FinancialRegister reg;
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 2) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        auto year = parse_int(row[0]);
        if (!year) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": bad year '" + row[0] + "'");
        }
        reg.add(static_cast<int>(*year), row[1]);
    }
    return reg;
}

EligibilityDecision classify(const FirmRecord &record, const ExemptionSets &sets,
                             const FinancialRegister &financial, DiagnosticSink *sink) {
    if (record.okopf.empty() && record.okfs.empty() && sink) {
        sink->add(Severity::kWarning, "MISSING_CODES",
                  "no okopf/okfs codes; classified eligible", record.inn, record.year);
    }
    if (sets.matches(ExemptCriteria::kGovernment, record)) {
        return {false, ExemptCriteria::kGovernment};
    }
    if (sets.matches(ExemptCriteria::kReligious, record)) {
        return {false, ExemptCriteria::kReligious};
    }
    if (financial.contains(record.year, record.inn)) {
        return {false, ExemptCriteria::kFinancial};
    }
    if (record.creation_date.year == record.year && record.creation_date.month >= 10) {
        return {false, ExemptCriteria::kNewlyIncorporatedQ4};
    }
    return {true, std::nullopt};
}

EligibilityTable eligibility_table(const std::vector<FirmRecord> &universe,
                                   const ExemptionSets &sets,
                                   const FinancialRegister &financial, DiagnosticSink &sink) {
    EligibilityTable table;
    table.rows.reserve(universe.size());
    std::map<int, EligibilitySummary> summary;
    for (const auto &record : universe) {
        EligibilityRow row{record.inn, record.year, classify(record, sets, financial, &sink),
                           financial.contains(record.year, record.inn)};
        auto &s = summary[record.year];
        s.year = record.year;
        if (row.decision.eligible) {
            ++s.eligible;
        } else {
            switch (*row.decision.exempt_criteria) {
            case ExemptCriteria::kGovernment: ++s.government; break;
            case ExemptCriteria::kReligious: ++s.religious; break;
            case ExemptCriteria::kFinancial: ++s.financial; break;
            case ExemptCriteria::kNewlyIncorporatedQ4: ++s.newly_incorporated_q4; break;
            }
        }
        table.rows.push_back(std::move(row));
    }
    table.summary.reserve(summary.size());
    for (const auto &[year, s] : summary) {
        table.summary.push_back(s);
    }
    return table;
}

void write_eligibility_csv(const std::filesystem::path &path,
                           const std::vector<EligibilityRow> &rows) {
    csv::Writer out(path);
    out.write({"inn", "year", "eligible", "exempt_criteria", "financial"});
    for (const auto &r : rows) {
        out.write({r.inn, std::to_string(r.year), r.decision.eligible ? "true" : "false",
                   r.decision.exempt_criteria ? to_string(*r.decision.exempt_criteria) : "",
                   r.financial ? "true" : "false"});
    }
    out.close();
}

std::vector<EligibilityRow> read_eligibility_csv(const std::filesystem::path &path) {
    auto rows = csv::read_all(path);
    std::vector<EligibilityRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 5) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        EligibilityRow r;
        r.inn = row[0];
        r.year = static_cast<int>(parse_int(row[1]).value_or(0));
        r.decision.eligible = row[2] == "true";
        if (!row[3].empty()) {
            r.decision.exempt_criteria = parse_exempt_criteria(row[3]);
        }
        r.financial = row[4] == "true";
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_csv(const std::filesystem::path &path,
                       const std::vector<EligibilitySummary> &summary) {
    csv::Writer out(path);
    out.write({"year", "eligible", "government", "religious", "financial",
               "newly_incorporated_q4"});
    for (const auto &s : summary) {
        out.write({std::to_string(s.year), std::to_string(s.eligible),
                   std::to_string(s.government), std::to_string(s.religious),
                   std::to_string(s.financial), std::to_string(s.newly_incorporated_q4)});
    }
    out.close();
}

} // namespace finpanel::eligibility
