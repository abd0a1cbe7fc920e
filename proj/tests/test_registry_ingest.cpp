#include "finpanel/registry_ingest.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

using namespace finpanel;
using namespace finpanel::registry;

namespace {

std::string firm_xml(const std::string &inn, const std::string &okved = "62.01",
                     const std::string &name = "OOO Vector",
                     const std::string &dissolution = "") {
    std::string out = "<firm><inn>" + inn + "</inn><ogrn>1027700070518</ogrn><name>" + name +
                      "</name><creation_date>2015-03-01</creation_date>";
    if (!dissolution.empty()) {
        out += "<dissolution_date>" + dissolution + "</dissolution_date>";
    }
    if (!okved.empty()) {
        out += "<okved>" + okved + "</okved>";
    }
    out += "<okopf>12300</okopf><okfs>16</okfs><okogu>4210014</okogu>"
           "<okpo>12345678</okpo><oktmo>45382000</oktmo>"
           "<address region=\"Region 77\" city=\"Gorod\" street=\"Ulitsa\" house=\"7\"/>"
           "</firm>";
    return out;
}

RegistrySnapshot snapshot_of(int year, const std::vector<std::string> &firm_docs) {
    std::string doc = "<snapshot as_of_year=\"" + std::to_string(year) + "\">";
    for (const auto &f : firm_docs) {
        doc += f;
    }
    doc += "</snapshot>";
    const auto dir = std::filesystem::temp_directory_path() / "finpanel_registry_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / ("snapshot_" + std::to_string(year) + ".xml");
    {
        std::ofstream out(path);
        out << doc;
    }
    DiagnosticSink sink;
    return parse_snapshot(path, sink);
}

} // namespace

TEST_CASE("well-formed documents pass through; schema violations are skipped") {
    DiagnosticSink sink;
    auto firm = parse_firm(xml::parse(firm_xml("7736050003")), sink);
    REQUIRE(firm.has_value());
    CHECK(firm->inn == "7736050003");
    CHECK(firm->okved == "62.01");
    CHECK(sink.empty());

    auto no_ogrn = parse_firm(
        xml::parse("<firm><inn>7736050003</inn>"
                   "<creation_date>2015-03-01</creation_date><address region=\"r\" "
                   "city=\"c\" street=\"s\" house=\"h\"/></firm>"),
        sink);
    CHECK_FALSE(no_ogrn.has_value());
    CHECK(sink.count("MALFORMED_DOCUMENT") == 1);
}

TEST_CASE("duplicate identifiers within one snapshot keep the later document") {
    std::string doc = "<snapshot as_of_year=\"2016\">" +
                      firm_xml("7736050003", "62.01", "First") +
                      firm_xml("7736050003", "62.01", "Second") + "</snapshot>";
    const auto dir = std::filesystem::temp_directory_path() / "finpanel_registry_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "dup.xml";
    {
        std::ofstream out(path);
        out << doc;
    }
    DiagnosticSink sink;
    auto snapshot = parse_snapshot(path, sink);
    REQUIRE(snapshot.firms.size() == 1);
    CHECK(snapshot.firms[0].name == "Second");
    CHECK(sink.count("DUPLICATE_IDENTIFIER") == 1);
}

TEST_CASE("universe rows span creation through dissolution") {
    auto snapshot = snapshot_of(
        2019, {firm_xml("7736050003", "62.01", "OOO Vector", "2018-06-30")});
    auto universe = build_universe({snapshot}, 2011, 2023);
    REQUIRE(universe.size() == 4);
    CHECK(universe.front().year == 2015);
    CHECK(universe.back().year == 2018);
    CHECK(universe.front().age == 0);
    CHECK(universe.back().age == 3);
    CHECK(universe.front().region == "Region 77");
    CHECK(universe.front().region_taxcode == "77");
}

TEST_CASE("attributes come from the nearest snapshot at or after the year") {
    auto early = snapshot_of(2016, {firm_xml("7736050003", "62.01")});
    auto late = snapshot_of(2018, {firm_xml("7736050003", "47.19")});
    auto universe = build_universe({early, late}, 2011, 2023);
    std::map<int, std::string> okved_by_year;
    for (const auto &r : universe) {
        okved_by_year[r.year] = r.okved;
    }
    CHECK(okved_by_year.at(2015) == "62.01");
    CHECK(okved_by_year.at(2016) == "62.01");
    CHECK(okved_by_year.at(2017) == "47.19"); // 2018 is the nearest at-or-after
    CHECK(okved_by_year.at(2018) == "47.19");
    CHECK(okved_by_year.at(2019) == "47.19"); // nearest before, none after
    CHECK(okved_by_year.at(2023) == "47.19");

    // snapshot order must not matter
    auto reordered = build_universe({late, early}, 2011, 2023);
    CHECK(universe == reordered);

    std::set<std::pair<std::string, int>> keys;
    for (const auto &r : universe) {
        CHECK(keys.insert({r.inn, r.year}).second);
    }
}

TEST_CASE("empty inputs are fatal") {
    CHECK_THROWS_AS(build_universe({}, 2011, 2023), PipelineError);
    RegistrySnapshot empty;
    empty.as_of_year = 2015;
    CHECK_THROWS_AS(build_universe({empty}, 2011, 2023), PipelineError);
}

TEST_CASE("code harmonization maps old codes and flags declared gaps") {
    CorrespondenceTable okved_table;
    okved_table.mapping["72.20"] = "62.01";
    CorrespondenceTable okopf_table;
    okopf_table.mapping["47"] = ""; // deliberate gap

    FirmRecord mapped;
    mapped.okved = "72.20";
    mapped.okopf = "12300";
    harmonize_codes(mapped, okved_table, okopf_table);
    CHECK(mapped.okved == "62.01");
    CHECK_FALSE(mapped.okved_unmapped);
    CHECK(mapped.okopf == "12300"); // post-change codes pass through

    FirmRecord gap;
    gap.okopf = "47";
    harmonize_codes(gap, okved_table, okopf_table);
    CHECK(gap.okopf == "47");
    CHECK(gap.okopf_unmapped);
}

TEST_CASE("missing codes fill from the next year, then the previous") {
    auto make = [](int year, const std::string &okved) {
        FirmRecord r;
        r.inn = "7736050003";
        r.year = year;
        r.okved = okved;
        return r;
    };

    SUBCASE("next year wins") {
        std::vector<FirmRecord> u = {make(2015, ""), make(2016, ""), make(2017, "62.01")};
        impute_missing_codes(u);
        CHECK(u[0].okved == "62.01");
        CHECK(u[1].okved == "62.01");
    }
    SUBCASE("previous year is the fallback") {
        std::vector<FirmRecord> u = {make(2015, "47.19"), make(2016, ""), make(2017, "")};
        impute_missing_codes(u);
        CHECK(u[1].okved == "47.19");
        CHECK(u[2].okved == "47.19");
    }
    SUBCASE("next-year precedence beats a nearer previous year") {
        std::vector<FirmRecord> u = {make(2015, "47.19"), make(2016, ""), make(2017, ""),
                                     make(2018, "62.01")};
        impute_missing_codes(u);
        CHECK(u[1].okved == "62.01");
        CHECK(u[2].okved == "62.01");
    }
    SUBCASE("all missing stays missing") {
        std::vector<FirmRecord> u = {make(2015, ""), make(2016, "")};
        impute_missing_codes(u);
        CHECK(u[0].okved.empty());
        CHECK(u[1].okved.empty());
    }
    SUBCASE("idempotent") {
        std::vector<FirmRecord> u = {make(2015, ""), make(2016, ""), make(2017, "62.01"),
                                     make(2018, "")};
        impute_missing_codes(u);
        auto once = u;
        impute_missing_codes(u);
        CHECK(u == once);
    }
}

TEST_CASE("universe csv round-trips") {
    auto snapshot = snapshot_of(2019, {firm_xml("7736050003")});
    auto universe = build_universe({snapshot}, 2011, 2023);
    const auto dir = std::filesystem::temp_directory_path() / "finpanel_registry_test";
    const auto path = dir / "universe.csv";
    write_universe_csv(path, universe);
    CHECK(read_universe_csv(path) == universe);
}
