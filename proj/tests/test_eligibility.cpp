#include "finpanel/eligibility.hpp"

#include <doctest.h>

using namespace finpanel;
using namespace finpanel::eligibility;

namespace {

ExemptionSets test_sets() {
    ExemptionSets sets;
    sets.add(ExemptCriteria::kGovernment, "okopf", "75201");
    sets.add(ExemptCriteria::kGovernment, "okfs", "12");
    sets.add(ExemptCriteria::kReligious, "okopf", "71500");
    return sets;
}

FirmRecord ordinary_llc(int year = 2020) {
    FirmRecord r;
    r.inn = "7736050003";
    r.year = year;
    r.okopf = "12300";
    r.okfs = "16";
    r.creation_date = {2010, 5, 1};
    return r;
}

} // namespace

TEST_CASE("religious legal forms are exempt") {
    auto record = ordinary_llc();
    record.okopf = "71500";
    auto decision = classify(record, test_sets(), {}, nullptr);
    CHECK_FALSE(decision.eligible);
    CHECK(decision.exempt_criteria == ExemptCriteria::kReligious);
}

TEST_CASE("fourth-quarter incorporation exempts the creation year only") {
    auto record = ordinary_llc(2020);
    record.creation_date = {2020, 11, 15};
    auto decision = classify(record, test_sets(), {}, nullptr);
    CHECK_FALSE(decision.eligible);
    CHECK(decision.exempt_criteria == ExemptCriteria::kNewlyIncorporatedQ4);

    record.year = 2021;
    auto next_year = classify(record, test_sets(), {}, nullptr);
    CHECK(next_year.eligible);

    auto september = ordinary_llc(2020);
    september.creation_date = {2020, 9, 30};
    CHECK(classify(september, test_sets(), {}, nullptr).eligible);
}

TEST_CASE("register membership marks financial organizations") {
    FinancialRegister reg;
    reg.add(2020, "7736050003");
    auto decision = classify(ordinary_llc(2020), test_sets(), reg, nullptr);
    CHECK_FALSE(decision.eligible);
    CHECK(decision.exempt_criteria == ExemptCriteria::kFinancial);
    // different year, same inn: not in the register
    CHECK(classify(ordinary_llc(2021), test_sets(), reg, nullptr).eligible);
}

TEST_CASE("rule order is government, religious, financial, then incorporation") {
    FinancialRegister reg;
    reg.add(2020, "7736050003");
    auto record = ordinary_llc(2020);
    record.okfs = "12"; // also in the financial register
    auto decision = classify(record, test_sets(), reg, nullptr);
    CHECK(decision.exempt_criteria == ExemptCriteria::kGovernment);
}

TEST_CASE("records without codes classify eligible with a diagnostic") {
    auto record = ordinary_llc();
    record.okopf.clear();
    record.okfs.clear();
    DiagnosticSink sink;
    auto decision = classify(record, test_sets(), {}, &sink);
    CHECK(decision.eligible);
    CHECK(sink.count("MISSING_CODES") == 1);
}

TEST_CASE("decisions always satisfy eligible xor criteria") {
    FinancialRegister reg;
    reg.add(2020, "7736050010");
    for (const auto &okopf : {"12300", "71500", "75201", ""}) {
        for (const auto &okfs : {"16", "12", ""}) {
            auto record = ordinary_llc();
            record.okopf = okopf;
            record.okfs = okfs;
            auto d = classify(record, test_sets(), reg, nullptr);
            CHECK(d.eligible == !d.exempt_criteria.has_value());
        }
    }
}

TEST_CASE("the table partitions a mixed universe as classified by hand") {
    FinancialRegister reg;
    reg.add(2020, "7736050009");
    std::vector<FirmRecord> universe;
    for (int i = 0; i < 10; ++i) {
        auto r = ordinary_llc(2020);
        r.inn = "773605000" + std::to_string(i);
        universe.push_back(r);
    }
    universe[0].okopf = "75201";            // government by legal form
    universe[1].okfs = "12";                // government by ownership
    universe[2].okopf = "71500";            // religious
    universe[9].inn = "7736050009";         // financial (register)
    universe[3].creation_date = {2020, 12, 1}; // newly incorporated
    // 4..8 stay ordinary

    DiagnosticSink sink;
    auto table = eligibility_table(universe, test_sets(), reg, sink);
    REQUIRE(table.summary.size() == 1);
    const auto &s = table.summary[0];
    CHECK(s.year == 2020);
    CHECK(s.eligible == 5);
    CHECK(s.government == 2);
    CHECK(s.religious == 1);
    CHECK(s.financial == 1);
    CHECK(s.newly_incorporated_q4 == 1);
    CHECK(table.rows.size() == 10);
    // the financial flag is register membership, independent of precedence
    CHECK(table.rows[9].financial);
    CHECK_FALSE(table.rows[0].financial);
}

TEST_CASE("empty universe yields an empty table") {
    DiagnosticSink sink;
    auto table = eligibility_table({}, test_sets(), {}, sink);
    CHECK(table.rows.empty());
    CHECK(table.summary.empty());
}
