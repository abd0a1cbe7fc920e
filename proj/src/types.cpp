#include "finpanel/types.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <unordered_map>

namespace finpanel {

std::string to_string(Section s) {
    switch (s) {
    case Section::kBalance: return "balance";
    case Section::kProfitLoss: return "pnl";
    case Section::kEquity: return "equity";
    case Section::kCashFlow: return "cashflow";
    case Section::kProperUse: return "properuse";
    }
    return "unknown";
}

std::string to_string(Provider p) {
    return p == Provider::kRosstat ? "rosstat" : "fns";
}

std::string to_string(Form f) {
    return f == Form::kFull ? "full" : "simplified";
}

std::string to_string(Unit u) {
    switch (u) {
    case Unit::kRubles: return "rubles";
    case Unit::kThousands: return "thousands";
    case Unit::kMillions: return "millions";
    }
    return "unknown";
}

std::string to_string(ExemptCriteria c) {
    switch (c) {
    case ExemptCriteria::kGovernment: return "GOVERNMENT";
    case ExemptCriteria::kReligious: return "RELIGIOUS";
    case ExemptCriteria::kFinancial: return "FINANCIAL";
    case ExemptCriteria::kNewlyIncorporatedQ4: return "NEWLY_INCORPORATED_Q4";
    }
    return "unknown";
}

std::string to_string(GeoQuality q) {
    switch (q) {
    case GeoQuality::kHouse: return "house";
    case GeoQuality::kStreet: return "street";
    case GeoQuality::kCity: return "city";
    case GeoQuality::kNone: return "none";
    }
    return "unknown";
}

std::optional<Provider> parse_provider(std::string_view s) {
    if (s == "rosstat") return Provider::kRosstat;
    if (s == "fns") return Provider::kFns;
    return std::nullopt;
}

std::optional<Form> parse_form(std::string_view s) {
    if (s == "full") return Form::kFull;
    if (s == "simplified") return Form::kSimplified;
    return std::nullopt;
}

std::optional<Unit> parse_unit(std::string_view s) {
    if (s == "rubles") return Unit::kRubles;
    if (s == "thousands") return Unit::kThousands;
    if (s == "millions") return Unit::kMillions;
    return std::nullopt;
}

std::optional<ExemptCriteria> parse_exempt_criteria(std::string_view s) {
    if (s == "GOVERNMENT") return ExemptCriteria::kGovernment;
    if (s == "RELIGIOUS") return ExemptCriteria::kReligious;
    if (s == "FINANCIAL") return ExemptCriteria::kFinancial;
    if (s == "NEWLY_INCORPORATED_Q4") return ExemptCriteria::kNewlyIncorporatedQ4;
    return std::nullopt;
}

std::optional<GeoQuality> parse_geo_quality(std::string_view s) {
    if (s == "house") return GeoQuality::kHouse;
    if (s == "street") return GeoQuality::kStreet;
    if (s == "city") return GeoQuality::kCity;
    if (s == "none") return GeoQuality::kNone;
    return std::nullopt;
}

GeoQuality quality_for_rank(int rank) {
    if (rank == 30) return GeoQuality::kHouse;
    if (rank >= 26 && rank <= 29) return GeoQuality::kStreet;
    if (rank >= 12 && rank <= 25) return GeoQuality::kCity;
    return GeoQuality::kNone;
}

namespace {

// Published output lines in column order, followed by codes that appear
// only in articulation equations (valid inputs, never exported).
constexpr std::array<std::string_view, 187> kExportedCodes = {
    // balance sheet
    "1100", "1110", "1120", "1130", "1140", "1150", "1160", "1170", "1180", "1190",
    "1200", "1210", "1220", "1230", "1240", "1250", "1260",
    "1300", "1310", "1320", "1340", "1350", "1360", "1370",
    "1400", "1410", "1420", "1430", "1450",
    "1500", "1510", "1520", "1530", "1540", "1550",
    "1600", "1700",
    // profit and loss
    "2110", "2120", "2100", "2210", "2220", "2200",
    "2310", "2320", "2330", "2340", "2350", "2300",
    "2410", "2411", "2412", "2421", "2430", "2450", "2460", "2400",
    "2510", "2520", "2530", "2500", "2900", "2910",
    // changes in equity, previous reporting period
    "3100",
    "3210", "3211", "3212", "3213", "3214", "3215", "3216", "321x",
    "3220", "3221", "3222", "3223", "3224", "3225", "3226", "3227", "322x",
    "3230", "3240", "3200",
    // changes in equity, current reporting period
    "3310", "3311", "3312", "3313", "3314", "3315", "3316", "331x",
    "3320", "3321", "3322", "3323", "3324", "3325", "3326", "3327", "332x",
    "3330", "3340", "3300",
    // adjustments due to accounting-policy changes and error correction
    "3400", "3410", "3420", "3500", "3401", "3411", "3421", "3501",
    "3402", "3412", "3422", "3502",
    // net assets
    "3600",
    // cash flow, operating
    "4110", "4111", "4112", "4113", "411x", "4119",
    "4120", "4121", "4122", "4123", "4124", "412x", "4129",
    "4100",
    // cash flow, investing
    "4210", "4211", "4212", "4213", "4214", "421x", "4219",
    "4220", "4221", "4222", "4223", "4224", "422x", "4229",
    "4200",
    // cash flow, financing
    "4310", "4311", "4312", "4313", "4314", "431x", "4319",
    "4320", "4321", "4322", "4323", "432x", "4329",
    "4300",
    "4400", "4450", "4500", "4490",
    // proper use of funds received
    "6100",
    "6210", "6215", "6220", "6230", "6240", "6250", "6200",
    "6310", "6311", "6312", "6313",
    "6320", "6321", "6322", "6323", "6324", "6325", "6326",
    "6330", "6350", "6300", "6400",
};

constexpr std::array<std::string_view, 9> kEquationOnlyCodes = {
    "1330", "4114", "4116", "4126", "4216", "4226", "4316", "4324", "4326",
};

constexpr std::size_t kRegistrySize = kExportedCodes.size() + kEquationOnlyCodes.size();

struct RegistryEntry {
    std::string_view text;
    Section section;
    bool exported;
};

Section section_for(std::string_view code) {
    switch (code[0]) {
    case '1': return Section::kBalance;
    case '2': return Section::kProfitLoss;
    case '3': return Section::kEquity;
    case '4': return Section::kCashFlow;
    default: return Section::kProperUse;
    }
}

const std::array<RegistryEntry, kRegistrySize> &registry_table() {
    static const std::array<RegistryEntry, kRegistrySize> table = [] {
        std::array<RegistryEntry, kRegistrySize> t{};
        std::size_t i = 0;
        for (auto code : kExportedCodes) {
            t[i++] = {code, section_for(code), true};
        }
        for (auto code : kEquationOnlyCodes) {
            t[i++] = {code, section_for(code), false};
        }
        return t;
    }();
    return table;
}

const std::unordered_map<std::string_view, std::uint16_t> &code_index() {
    static const std::unordered_map<std::string_view, std::uint16_t> index = [] {
        std::unordered_map<std::string_view, std::uint16_t> m;
        const auto &table = registry_table();
        for (std::size_t i = 0; i < table.size(); ++i) {
            m.emplace(table[i].text, static_cast<std::uint16_t>(i));
        }
        return m;
    }();
    return index;
}

} // namespace

std::optional<LineCode> LineCode::parse(std::string_view text) {
    const auto &index = code_index();
    auto it = index.find(text);
    if (it == index.end()) {
        return std::nullopt;
    }
    return LineCode(it->second);
}

LineCode LineCode::of(std::string_view text) {
    auto code = parse(text);
    if (!code) {
        throw std::invalid_argument("unknown line code: " + std::string(text));
    }
    return *code;
}

std::string_view LineCode::str() const { return registry_table()[idx_].text; }

Section LineCode::section() const { return registry_table()[idx_].section; }

bool LineCode::is_optional_sum() const { return str().back() == 'x'; }

bool LineCode::exported() const { return registry_table()[idx_].exported; }

const std::vector<LineCode> &line_registry() {
    static const std::vector<LineCode> codes = [] {
        std::vector<LineCode> v;
        v.reserve(kRegistrySize);
        for (std::uint16_t i = 0; i < kRegistrySize; ++i) {
            v.push_back(LineCode(i));
        }
        return v;
    }();
    return codes;
}

std::optional<LineCode> optional_sum_for_parent(LineCode parent) {
    std::string_view text = parent.str();
    if (text.back() != '0') {
        return std::nullopt;
    }
    std::string x_text(text.substr(0, 3));
    x_text.push_back('x');
    return LineCode::parse(x_text);
}

LineCode parent_of_optional_sum(LineCode x_code) {
    std::string parent_text(x_code.str().substr(0, 3));
    parent_text.push_back('0');
    return LineCode::of(parent_text);
}

std::string okved_section(std::string_view okved) {
    if (okved.size() < 2 || okved[0] < '0' || okved[0] > '9' || okved[1] < '0' ||
        okved[1] > '9') {
        return "";
    }
    const int division = (okved[0] - '0') * 10 + (okved[1] - '0');
    // NACE Rev.2 section boundaries.
    if (division >= 1 && division <= 3) return "A";
    if (division >= 5 && division <= 9) return "B";
    if (division >= 10 && division <= 33) return "C";
    if (division == 35) return "D";
    if (division >= 36 && division <= 39) return "E";
    if (division >= 41 && division <= 43) return "F";
    if (division >= 45 && division <= 47) return "G";
    if (division >= 49 && division <= 53) return "H";
    if (division >= 55 && division <= 56) return "I";
    if (division >= 58 && division <= 63) return "J";
    if (division >= 64 && division <= 66) return "K";
    if (division == 68) return "L";
    if (division >= 69 && division <= 75) return "M";
    if (division >= 77 && division <= 82) return "N";
    if (division == 84) return "O";
    if (division == 85) return "P";
    if (division >= 86 && division <= 88) return "Q";
    if (division >= 90 && division <= 93) return "R";
    if (division >= 94 && division <= 96) return "S";
    if (division >= 97 && division <= 98) return "T";
    if (division == 99) return "U";
    return "";
}

} // namespace finpanel
