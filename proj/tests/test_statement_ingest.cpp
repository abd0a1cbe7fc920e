#include "finpanel/ingest.hpp"

#include "finpanel/csv.hpp"

#include <doctest.h>

#include <filesystem>

using namespace finpanel;
using namespace finpanel::ingest;

namespace {

const char *kFilingXml = R"(<filing inn="7736050003" year="2020" form="full" unit="thousands" submitted="2021-03-25">
  <line_2110>500</line_2110>
  <line_2510>0</line_2510>
  <prior1_line_2110>450</prior1_line_2110>
  <prior2_line_1600>900</prior2_line_1600>
  <decoding parent="4110" label="gas sales">30</decoding>
  <decoding parent="4110" label="oil sales">70</decoding>
</filing>)";

} // namespace

TEST_CASE("provider xml keeps absence and zero distinct") {
    DiagnosticSink sink;
    auto filing = parse_fns_xml(kFilingXml, sink);
    REQUIRE(filing.has_value());
    CHECK(filing->inn == "7736050003");
    CHECK(filing->year == 2020);
    CHECK(get_line(filing->current, LineCode::of("2110")) == Money{500});
    CHECK_FALSE(get_line(filing->current, LineCode::of("2120")).has_value());
    CHECK(get_line(filing->current, LineCode::of("2510")) == Money{0}); // a filed zero
    CHECK(get_line(filing->prior1, LineCode::of("2110")) == Money{450});
    CHECK(get_line(filing->prior2, LineCode::of("1600")) == Money{900});
    REQUIRE(filing->decodings.size() == 2);
    CHECK(filing->decodings[0].value == 30);
    CHECK(filing->decodings[1].value == 70);
    CHECK(sink.empty());
}

TEST_CASE("provider xml round-trips through the writer") {
    DiagnosticSink sink;
    auto filing = parse_fns_xml(kFilingXml, sink);
    REQUIRE(filing.has_value());
    filing->current[LineCode::of("2400")] = -12; // negative values survive too
    auto reparsed = parse_fns_xml(write_fns_xml(*filing), sink);
    REQUIRE(reparsed.has_value());
    CHECK(*reparsed == *filing);
    CHECK(sink.empty());
}

TEST_CASE("provider xml reports malformed documents") {
    DiagnosticSink sink;
    CHECK_FALSE(parse_fns_xml("<filing inn=\"123\" year=\"2020\" form=\"full\" "
                              "unit=\"thousands\" submitted=\"2021-01-01\"/>",
                              sink)
                    .has_value());
    CHECK_FALSE(parse_fns_xml("<filing inn=\"7736050003\" year=\"2012\" form=\"full\" "
                              "unit=\"thousands\" submitted=\"2021-01-01\"/>",
                              sink)
                    .has_value());
    CHECK_FALSE(parse_fns_xml("<filing inn=\"7736050003\" year=\"2020\" form=\"full\" "
                              "unit=\"thousands\" submitted=\"2021-01-01\">"
                              "<line_2110>abc</line_2110></filing>",
                              sink)
                    .has_value());
    CHECK(sink.count("MALFORMED_DOCUMENT") == 3);
}

TEST_CASE("unknown sub-lines become optional lines only under decodable parents") {
    DiagnosticSink sink;
    auto filing = parse_fns_xml("<filing inn=\"7736050003\" year=\"2020\" form=\"full\" "
                                "unit=\"thousands\" submitted=\"2021-01-01\">"
                                "<line_4115>40</line_4115>"   // unknown, 4110 family
                                "<line_1235>10</line_1235>"   // unknown, balance family
                                "</filing>",
                                sink);
    REQUIRE(filing.has_value());
    REQUIRE(filing->decodings.size() == 1);
    CHECK(filing->decodings[0].parent == LineCode::of("4110"));
    CHECK(filing->decodings[0].value == 40);
    CHECK(sink.count("UNKNOWN_LINE_CODE") == 1);
}

TEST_CASE("prior2 columns outside the balance sheet are rejected") {
    DiagnosticSink sink;
    auto filing = parse_fns_xml("<filing inn=\"7736050003\" year=\"2020\" form=\"full\" "
                                "unit=\"thousands\" submitted=\"2021-01-01\">"
                                "<prior2_line_2110>5</prior2_line_2110></filing>",
                                sink);
    REQUIRE(filing.has_value());
    CHECK(filing->prior2.empty());
    CHECK(sink.count("UNKNOWN_LINE_CODE") == 1);
}

TEST_CASE("tabular rows treat zeros as missing") {
    const auto dir = std::filesystem::temp_directory_path() / "finpanel_ingest_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "rosstat_2015.csv";
    {
        csv::Writer out(path);
        out.write({"inn", "year", "form", "unit", "2110", "2120", "1600", "1600_p1"});
        out.write({"7736050003", "2015", "full", "thousands", "500", "0", "900", "850"});
        out.write({"7736050004", "2015", "simplified", "thousands", "0", "0", "70", ""});
        out.write({"7736050005", "2015", "full", "thousands", "1", "2"}); // short row
        out.write({"7736050006", "2014", "full", "thousands", "1", "2", "3", "4"});
        out.close();
    }
    DiagnosticSink sink;
    auto filings = parse_rosstat_csv(path, 2015, sink);
    REQUIRE(filings.size() == 2);
    CHECK(get_line(filings[0].current, LineCode::of("2110")) == Money{500});
    CHECK_FALSE(get_line(filings[0].current, LineCode::of("2120")).has_value());
    CHECK(get_line(filings[0].prior1, LineCode::of("1600")) == Money{850});
    CHECK_FALSE(get_line(filings[1].current, LineCode::of("2110")).has_value());
    CHECK(sink.count("MALFORMED_ROW") == 2);

    for (const auto &filing : filings) {
        for (const auto &[code, value] : filing.current) {
            CHECK(value != 0);
        }
    }
    CHECK_THROWS_AS(parse_rosstat_csv(path, 2019, sink), PipelineError);
}

TEST_CASE("unit normalization lands on thousands with half-away rounding") {
    RawFiling filing;
    filing.unit = Unit::kMillions;
    filing.current[LineCode::of("2110")] = 5;
    normalize_units(filing);
    CHECK(get_line(filing.current, LineCode::of("2110")) == Money{5000});
    CHECK(filing.unit == Unit::kThousands);

    RawFiling rubles;
    rubles.unit = Unit::kRubles;
    rubles.current[LineCode::of("2110")] = 5500;
    rubles.current[LineCode::of("2120")] = 5499;
    rubles.current[LineCode::of("2400")] = -5500;
    rubles.current[LineCode::of("2350")] = -500;
    rubles.prior1[LineCode::of("2110")] = 1500;
    normalize_units(rubles);
    CHECK(get_line(rubles.current, LineCode::of("2110")) == Money{6});
    CHECK(get_line(rubles.current, LineCode::of("2120")) == Money{5});
    CHECK(get_line(rubles.current, LineCode::of("2400")) == Money{-6});
    CHECK(get_line(rubles.current, LineCode::of("2350")) == Money{-1});
    CHECK(get_line(rubles.prior1, LineCode::of("2110")) == Money{2});

    RawFiling already;
    already.unit = Unit::kThousands;
    already.current[LineCode::of("2110")] = 7;
    normalize_units(already);
    CHECK(get_line(already.current, LineCode::of("2110")) == Money{7});
}

TEST_CASE("latest filing survives dedup, hash breaks ties") {
    RawFiling march;
    march.inn = "7736050003";
    march.year = 2023;
    march.submission_date = {2024, 3, 1};
    march.current[LineCode::of("2110")] = 100;
    RawFiling june = march;
    june.submission_date = {2024, 6, 1};
    june.current[LineCode::of("2110")] = 150;

    CHECK(dedupe_filings({march, june}).submission_date == Date{2024, 6, 1});
    CHECK(dedupe_filings({june, march}).submission_date == Date{2024, 6, 1});
    CHECK(dedupe_filings({march}) == march);

    RawFiling twin = march;
    twin.current[LineCode::of("2110")] = 222; // same date, different content
    auto pick_ab = dedupe_filings({march, twin});
    auto pick_ba = dedupe_filings({twin, march});
    CHECK(pick_ab == pick_ba);
    const auto winner_hash = content_hash(pick_ab);
    CHECK(winner_hash == std::max(content_hash(march), content_hash(twin)));

    CHECK_THROWS_AS(dedupe_filings({}), PipelineError);
}

TEST_CASE("decoding lines fold into x-sums for decodable sections only") {
    RawFiling filing;
    filing.decodings = {{LineCode::of("4110"), "a", 30},
                        {LineCode::of("4110"), "b", 70},
                        {LineCode::of("3310"), "c", 5},
                        {LineCode::of("1230"), "d", 999}};
    aggregate_decodings(filing);
    CHECK(get_line(filing.current, LineCode::of("411x")) == Money{100});
    CHECK(get_line(filing.current, LineCode::of("331x")) == Money{5});
    CHECK(filing.current.count(LineCode::of("1230")) == 0);
    CHECK(filing.decodings.empty());
    CHECK(filing.current.size() == 2);

    RawFiling none;
    aggregate_decodings(none);
    CHECK(none.current.empty());
}

TEST_CASE("tax lines consolidate from 2020 onwards") {
    LineValues lines;
    lines[LineCode::of("2411")] = 80;
    lines[LineCode::of("2412")] = -20;

    LineValues y2019 = lines;
    consolidate_tax_lines(y2019, 2019);
    CHECK(y2019.count(LineCode::of("2410")) == 0);

    LineValues y2018 = lines;
    consolidate_tax_lines(y2018, 2018);
    CHECK(y2018.count(LineCode::of("2410")) == 0);

    LineValues y2020 = lines;
    consolidate_tax_lines(y2020, 2020);
    CHECK(get_line(y2020, LineCode::of("2410")) == Money{60});
    CHECK(get_line(y2020, LineCode::of("2411")) == Money{80}); // components preserved

    LineValues partial;
    partial[LineCode::of("2412")] = -7;
    consolidate_tax_lines(partial, 2021);
    CHECK(get_line(partial, LineCode::of("2410")) == Money{-7});

    LineValues untouched;
    untouched[LineCode::of("2410")] = 42;
    consolidate_tax_lines(untouched, 2021);
    CHECK(get_line(untouched, LineCode::of("2410")) == Money{42});
}

TEST_CASE("packed line values round-trip") {
    LineValues lines;
    lines[LineCode::of("2110")] = -5;
    lines[LineCode::of("1100")] = 300;
    lines[LineCode::of("411x")] = 0;
    CHECK(unpack_lines(pack_lines(lines)) == lines);
    CHECK(pack_lines({}).empty());
    CHECK(unpack_lines("").empty());
    CHECK_THROWS_AS(unpack_lines("9999:5"), PipelineError);
}
