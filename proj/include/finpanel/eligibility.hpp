#pragma once

#include "finpanel/diagnostics.hpp"
#include "finpanel/types.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace finpanel::eligibility {

/// Code sets behind the rule-based exemptions, loaded from a CSV of
/// (criterion,code_kind,code); the legal texts are data, not code.
class ExemptionSets {
  public:
    static ExemptionSets load(const std::filesystem::path &path);

    bool matches(ExemptCriteria criterion, const FirmRecord &record) const;

    void add(ExemptCriteria criterion, const std::string &code_kind, const std::string &code);

  private:
    // criterion -> code_kind (okopf/okfs/okogu) -> codes
    std::map<ExemptCriteria, std::map<std::string, std::set<std::string>>> sets_;
};

/// Year-stamped membership in the central-bank registers.
class FinancialRegister {
  public:
    static FinancialRegister load(const std::filesystem::path &path);

    bool contains(int year, const std::string &inn) const {
        return entries_.count({year, inn}) > 0;
    }
    void add(int year, const std::string &inn) { entries_.insert({year, inn}); }

  private:
    std::set<std::pair<int, std::string>> entries_;
};

/// First matching rule in fixed order GOVERNMENT, RELIGIOUS, FINANCIAL,
/// NEWLY_INCORPORATED_Q4 wins; otherwise eligible. A record with neither
/// okopf nor okfs is classified eligible with a MISSING_CODES diagnostic
/// (absence of evidence of exemption).
EligibilityDecision classify(const FirmRecord &record, const ExemptionSets &sets,
                             const FinancialRegister &financial, DiagnosticSink *sink);

struct EligibilityRow {
    std::string inn;
    int year = 0;
    EligibilityDecision decision;
    bool financial = false; // register membership, independent of precedence
};

struct EligibilitySummary {
    int year = 0;
    std::size_t eligible = 0;
    std::size_t government = 0;
    std::size_t religious = 0;
    std::size_t financial = 0;
    std::size_t newly_incorporated_q4 = 0;
};

struct EligibilityTable {
    std::vector<EligibilityRow> rows;
    std::vector<EligibilitySummary> summary; // per year, ascending
};

EligibilityTable eligibility_table(const std::vector<FirmRecord> &universe,
                                   const ExemptionSets &sets,
                                   const FinancialRegister &financial, DiagnosticSink &sink);

void write_eligibility_csv(const std::filesystem::path &path,
                           const std::vector<EligibilityRow> &rows);
std::vector<EligibilityRow> read_eligibility_csv(const std::filesystem::path &path);
void write_summary_csv(const std::filesystem::path &path,
                       const std::vector<EligibilitySummary> &summary);

} // namespace finpanel::eligibility
