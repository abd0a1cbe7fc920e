#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"
#include "finpanel/xml.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>

using namespace finpanel;

TEST_CASE("iso dates parse and order") {
    auto d = parse_date("2015-03-01");
    REQUIRE(d.has_value());
    CHECK(d->year == 2015);
    CHECK(d->month == 3);
    CHECK(d->day == 1);
    CHECK(to_string(*d) == "2015-03-01");
    CHECK(*parse_date("2024-06-01") > *parse_date("2024-03-01"));
    CHECK_FALSE(parse_date("2015-13-01").has_value());
    CHECK_FALSE(parse_date("20150301").has_value());
    CHECK_FALSE(parse_date("").has_value());
}

TEST_CASE("integer parsing is strict") {
    CHECK(parse_int("042") == 42);
    CHECK(parse_int("-5") == -5);
    CHECK_FALSE(parse_int("5x").has_value());
    CHECK_FALSE(parse_int("").has_value());
    CHECK_FALSE(parse_int("1.5").has_value());
}

TEST_CASE("fnv1a digest is stable") {
    Fnv1a h;
    h.update("abc");
    CHECK(h.digest() == 0xe71fa2190541574bULL); // published fnv-1a test vector
}

TEST_CASE("parallel_chunks covers the range once for any worker count") {
    for (int workers : {1, 2, 7}) {
        std::vector<std::atomic<int>> hits(101);
        parallel_chunks(hits.size(), workers, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                ++hits[i];
            }
        });
        for (const auto &h : hits) {
            CHECK(h.load() == 1);
        }
    }
}

TEST_CASE("csv round-trips quoting") {
    const auto dir = std::filesystem::temp_directory_path() / "finpanel_csv_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "quirks.csv";
    const std::vector<csv::Row> rows = {
        {"plain", "with,comma", "with\"quote", "multi\nline", ""},
        {"", "", ""},
    };
    {
        csv::Writer out(path);
        for (const auto &row : rows) {
            out.write(row);
        }
        out.close();
    }
    CHECK(csv::read_all(path) == rows);
}

TEST_CASE("csv writer leaves no partial file behind on abandonment") {
    const auto dir = std::filesystem::temp_directory_path() / "finpanel_csv_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "abandoned.csv";
    std::filesystem::remove(path);
    {
        csv::Writer out(path);
        out.write({"a"});
        // no close
    }
    CHECK_FALSE(std::filesystem::exists(path));
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("xml parses the fixture dialect") {
    const auto node = xml::parse("<?xml version=\"1.0\"?>\n"
                                 "<!-- note -->\n"
                                 "<firm attr=\"a &amp; b\">\n"
                                 "  <inn>7736050003</inn>\n"
                                 "  <empty/>\n"
                                 "  text &lt;here&gt;\n"
                                 "</firm>");
    CHECK(node.name == "firm");
    CHECK(node.attr("attr") == "a & b");
    REQUIRE(node.child("inn") != nullptr);
    CHECK(node.child("inn")->text == "7736050003");
    CHECK(node.child("empty") != nullptr);
    CHECK(node.text.find("text <here>") != std::string::npos);
}

TEST_CASE("xml rejects malformed documents") {
    CHECK_THROWS_AS(xml::parse("<a><b></a>"), xml::ParseError);
    CHECK_THROWS_AS(xml::parse("<a>"), xml::ParseError);
    CHECK_THROWS_AS(xml::parse(""), xml::ParseError);
    CHECK_THROWS_AS(xml::parse("<a/><b/>"), xml::ParseError);
}
