#include "finpanel/synth.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/ingest.hpp"
#include "finpanel/registry_ingest.hpp"
#include "finpanel/util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace finpanel::synth {

namespace {

constexpr int kRosstatLastYear = 2018;
constexpr int kFnsFirstYear = 2019;
constexpr int kFirstFilingYear = 2012;

/// splitmix64: stable across platforms, unlike the standard distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // inclusive bounds
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() %
                                              static_cast<std::uint64_t>(hi - lo + 1));
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return uniform01() < p; }

    template <typename T> void shuffle(std::vector<T> &v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(range(0, i - 1))]);
        }
    }

  private:
    std::uint64_t state_;
};

enum class FirmClass { kOrdinary, kGovernment, kReligious, kFinancial };

std::string to_string(FirmClass c) {
    switch (c) {
    case FirmClass::kOrdinary: return "ordinary";
    case FirmClass::kGovernment: return "government";
    case FirmClass::kReligious: return "religious";
    case FirmClass::kFinancial: return "financial";
    }
    return "unknown";
}

struct FirmTruth {
    std::size_t index = 0;
    std::string inn;
    std::string ogrn;
    std::string name;
    FirmClass cls = FirmClass::kOrdinary;
    Date creation;
    std::optional<Date> dissolution;
    Form form = Form::kFull;
    Unit unit = Unit::kThousands;
    Money lattice = 1; // 1000 for firms filing in millions
    Money scale_units = 64;
    std::string okved, okopf, okfs, okogu, okpo, oktmo;
    std::string snap_okved, snap_okopf; // snapshot values (possibly old classifiers)
    bool okopf_unmapped = false;
    int okved_missing_until = 0; // snapshots up to this year omit okved
    StructuredAddress address;
    GeoQuality geo_class = GeoQuality::kNone;
    int geo_rank = 0;
    std::string geo_lat, geo_lon; // decimal text, the single source of truth

    int first_year(int span_start) const { return std::max(creation.year, span_start); }
    int last_year(int span_end) const {
        return dissolution ? std::min(dissolution->year, span_end) : span_end;
    }
};

const std::array<const char *, 8> kRegionTax = {"77", "78", "16", "23",
                                                "54", "66", "02", "63"};
const std::array<const char *, 6> kIndustries = {"62.01", "10.11", "47.19",
                                                 "41.20", "68.20", "49.41"};
const std::array<std::pair<const char *, const char *>, 6> kOkvedOldNew = {{
    {"72.20", "62.01"},
    {"15.11", "10.11"},
    {"52.11", "47.19"},
    {"45.21", "41.20"},
    {"70.20", "68.20"},
    {"60.24", "49.41"},
}};
const std::array<const char *, 2> kGovOkopf = {"75201", "75203"};
const std::array<const char *, 3> kGovOkfs = {"12", "13", "14"};
constexpr const char *kReligiousOkopf = "71500";
constexpr const char *kLlcOkopf = "12300";
constexpr const char *kPrivateOkfs = "16";
constexpr const char *kUnmappableOkopf = "47";

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

Provider provider_for(int year) {
    return year <= kRosstatLastYear ? Provider::kRosstat : Provider::kFns;
}

bool section_in_prior1(Section s, Provider provider) {
    if (s == Section::kBalance || s == Section::kProfitLoss) {
        return true;
    }
    // the tabular era lacked prior-year cash-flow columns entirely
    return s == Section::kCashFlow && provider == Provider::kFns;
}

/// Deterministic true statement for one firm-year: positive components,
/// totals exact under the articulation suite, no zeros outside the planted
/// 2019+ zero line, everything on the firm's unit lattice.
LineValues true_lines(std::uint64_t seed, const FirmTruth &firm, int year) {
    Fnv1a h;
    h.update(firm.inn);
    h.update(static_cast<std::int64_t>(year));
    h.update(static_cast<std::int64_t>(seed));
    Rng rng(h.digest());

    const Money u = firm.lattice;
    const Money base = std::max<Money>(64, firm.scale_units * rng.range(80, 120) / 100);
    LineValues out;
    auto put = [&out](const char *code, Money units, Money lattice) {
        out[LineCode::of(code)] = units * lattice;
    };
    auto pct = [](Money v, std::int64_t p) { return std::max<Money>(1, v * p / 100); };

    // profit and loss
    const Money rev = base * rng.range(8, 12);
    const Money margin = pct(rev, rng.range(10, 30));
    const Money m2210 = pct(margin, rng.range(5, 12));
    const Money m2220 = pct(margin, rng.range(5, 12));
    const Money m2200 = margin - m2210 - m2220;
    const Money m2310 = pct(m2200, rng.range(2, 6));
    const Money m2320 = pct(m2200, rng.range(2, 6));
    const Money m2330 = pct(m2200, rng.range(2, 6));
    const Money m2340 = pct(m2200, rng.range(2, 6));
    const Money m2350 = pct(m2200, rng.range(2, 6));
    const Money m2300 = m2200 - m2310 + m2320 - m2330 + m2340 - m2350;
    put("2110", rev, u);
    put("2120", rev - margin, u);
    if (firm.form == Form::kFull) {
        put("2100", margin, u);
        put("2210", m2210, u);
        put("2220", m2220, u);
        put("2200", m2200, u);
        put("2310", m2310, u);
        put("2320", m2320, u);
        put("2300", m2300, u);
    }
    put("2330", m2330, u);
    put("2340", m2340, u);
    put("2350", m2350, u);

    Money tax = pct(firm.form == Form::kFull ? m2300 : margin, rng.range(10, 20));
    if (year >= kFnsFirstYear && firm.form == Form::kFull) {
        Money deferred = rng.range(1, 3) * (rng.chance(0.3) ? -1 : 1);
        Money current = std::max<Money>(1, tax - deferred);
        tax = current + deferred;
        if (tax == 0) {
            ++current;
            ++tax;
        }
        put("2411", current, u);
        put("2412", deferred, u);
    }
    put("2410", tax, u);
    if (firm.form == Form::kFull) {
        Money net = m2300 - tax;
        if (net == 0) {
            net = 1; // keep the tabular era free of true zeros
        }
        put("2400", net, u);
        if (year >= kFnsFirstYear && (firm.index + year) % 3 == 0) {
            put("2510", 0, 1); // a really filed zero; only the 2019+ format keeps it
        }
    } else {
        const Money m2400 = rev - (rev - margin) - m2330 + m2340 - m2350 - tax;
        put("2400", m2400 == 0 ? 1 : m2400, u);
    }

    // balance sheet
    const Money assets = base * rng.range(15, 25);
    if (firm.form == Form::kFull) {
        const Money b1110 = pct(assets, 5);
        const Money b1150 = pct(assets, rng.range(20, 35));
        const Money b1170 = pct(assets, rng.range(5, 12));
        const Money b1180 = pct(assets, 2);
        const Money b1100 = b1110 + b1150 + b1170 + b1180;
        const Money b1210 = pct(assets, rng.range(10, 18));
        const Money b1230 = pct(assets, rng.range(6, 12));
        const Money b1250 = pct(assets, rng.range(4, 10));
        const Money b1200 = b1210 + b1230 + b1250;
        const Money b1600 = b1100 + b1200;
        const Money b1410 = pct(b1600, rng.range(4, 8));
        const Money b1420 = pct(b1600, 2);
        const Money b1400 = b1410 + b1420;
        const Money b1510 = pct(b1600, rng.range(3, 6));
        const Money b1520 = pct(b1600, rng.range(4, 8));
        const Money b1550 = pct(b1600, 1);
        const Money b1500 = b1510 + b1520 + b1550;
        const Money b1300 = b1600 - b1400 - b1500;
        const Money b1310 = pct(b1600, 3);
        put("1110", b1110, u);
        put("1150", b1150, u);
        put("1170", b1170, u);
        put("1180", b1180, u);
        put("1100", b1100, u);
        put("1210", b1210, u);
        put("1230", b1230, u);
        put("1250", b1250, u);
        put("1200", b1200, u);
        put("1310", b1310, u);
        put("1370", b1300 - b1310, u);
        put("1300", b1300, u);
        put("1410", b1410, u);
        put("1420", b1420, u);
        put("1400", b1400, u);
        put("1510", b1510, u);
        put("1520", b1520, u);
        put("1550", b1550, u);
        put("1500", b1500, u);
        put("1600", b1600, u);
        put("1700", b1600, u);
        put("3600", b1300, u);
    } else {
        const Money b1150 = pct(assets, rng.range(25, 40));
        const Money b1170 = pct(assets, rng.range(5, 12));
        const Money b1210 = pct(assets, rng.range(12, 20));
        const Money b1230 = pct(assets, rng.range(8, 15));
        const Money b1250 = pct(assets, rng.range(4, 10));
        const Money b1600 = b1150 + b1170 + b1210 + b1230 + b1250;
        const Money b1410 = pct(b1600, rng.range(4, 8));
        const Money b1450 = pct(b1600, 2);
        const Money b1510 = pct(b1600, rng.range(2, 5));
        const Money b1520 = pct(b1600, rng.range(4, 8));
        const Money b1550 = pct(b1600, 2);
        const Money b1300 = b1600 - b1410 - b1450 - b1510 - b1520 - b1550;
        put("1150", b1150, u);
        put("1170", b1170, u);
        put("1210", b1210, u);
        put("1230", b1230, u);
        put("1250", b1250, u);
        put("1600", b1600, u);
        put("1410", b1410, u);
        put("1450", b1450, u);
        put("1510", b1510, u);
        put("1520", b1520, u);
        put("1550", b1550, u);
        put("1300", b1300, u);
        put("1700", b1600, u);
    }

    // cash flow, full statements only
    if (firm.form == Form::kFull) {
        const Money cf = base * rng.range(5, 9);
        const Money t4100 = std::max<Money>(3, cf * rng.range(10, 30) / 100);
        const Money v4120 = std::max<Money>(8, cf);
        const Money v4110 = v4120 + t4100;
        Money v4111 = std::max<Money>(1, v4110 * 3 / 5);
        Money v4112 = std::max<Money>(1, v4110 / 5);
        if (v4111 + v4112 >= v4110) {
            v4111 = v4110 - 2;
            v4112 = 1;
        }
        const Money v4119 = v4110 - v4111 - v4112;
        Money v4121 = std::max<Money>(1, v4120 / 2);
        Money v4122 = std::max<Money>(1, v4120 / 4);
        Money v4124 = std::max<Money>(1, v4120 / 10);
        if (v4121 + v4122 + v4124 >= v4120) {
            v4121 = v4120 - 3;
            v4122 = 1;
            v4124 = 1;
        }
        const Money v4129 = v4120 - v4121 - v4122 - v4124;
        const Money t4200 = -std::max<Money>(2, cf * rng.range(5, 15) / 100);
        const Money v4220 = -t4200 + std::max<Money>(2, cf * rng.range(5, 15) / 100);
        const Money v4210 = v4220 + t4200;
        const Money v4211 = std::max<Money>(1, v4210 * 7 / 10);
        const Money v4219 = v4210 - v4211;
        const Money v4221 = std::max<Money>(1, v4220 * 6 / 10);
        const Money v4229 = v4220 - v4221;
        const Money t4300 = std::max<Money>(2, cf * rng.range(5, 15) / 100);
        const Money v4320 = std::max<Money>(2, cf * rng.range(5, 20) / 100);
        const Money v4310 = v4320 + t4300;
        const Money v4311 = std::max<Money>(1, v4310 * 8 / 10);
        const Money v4319 = v4310 - v4311;
        const Money v4321 = std::max<Money>(1, v4320 / 2);
        const Money v4329 = v4320 - v4321;
        const Money t4400 = t4100 + t4200 + t4300;
        const Money v4450 = std::max<Money>(1, cf * rng.range(10, 50) / 100);
        Money v4490 = std::max<Money>(1, std::min(cf / 20, (t4400 + v4450) / 4));
        if (rng.chance(0.5)) {
            v4490 = -v4490;
        }
        put("4110", v4110, u);
        put("4111", v4111, u);
        put("4112", v4112, u);
        put("4119", v4119, u);
        put("4120", v4120, u);
        put("4121", v4121, u);
        put("4122", v4122, u);
        put("4124", v4124, u);
        put("4129", v4129, u);
        put("4100", t4100, u);
        put("4210", v4210, u);
        put("4211", v4211, u);
        put("4219", v4219, u);
        put("4220", v4220, u);
        put("4221", v4221, u);
        put("4229", v4229, u);
        put("4200", t4200, u);
        put("4310", v4310, u);
        put("4311", v4311, u);
        put("4319", v4319, u);
        put("4320", v4320, u);
        put("4321", v4321, u);
        put("4329", v4329, u);
        put("4300", t4300, u);
        put("4400", t4400, u);
        put("4450", v4450, u);
        put("4490", v4490, u);
        put("4500", t4400 + v4450 + v4490, u);
    }
    return out;
}

struct Selections {
    std::set<std::pair<std::size_t, int>> filed;      // firm index, year
    std::set<std::pair<std::size_t, int>> errors;     // articulation perturbations
    std::set<std::pair<std::size_t, int>> anomalies;  // implausible filings
    std::set<std::pair<std::size_t, int>> duplicates; // adjusted-filing extras
    std::set<std::pair<std::size_t, int>> decodings;  // optional-line carriers
};

struct YearTally {
    std::size_t eligible = 0;
    std::size_t filed_eligible = 0;
    std::size_t filed_all = 0;
    std::size_t filed_nonanomalous = 0;
    std::size_t errors = 0;
};

} // namespace

void CorpusPlan::validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (n_firms < 1) {
        throw PipelineError("CONFIG_INVALID", "n_firms must be positive");
    }
    if (span_start < 2011 || span_end > 2023 || span_start > span_end) {
        throw PipelineError("CONFIG_INVALID", "span must lie within 2011-2023");
    }
    if (!in01(filing_rate) || !in01(articulation_error_rate) || !in01(duplicate_rate) ||
        !in01(unit_rubles_share) || !in01(unit_millions_share) || !in01(government_share) ||
        !in01(religious_share) || !in01(financial_share) || !in01(ineligible_filer_rate) ||
        !in01(decoding_share)) {
        throw PipelineError("CONFIG_INVALID", "rates must lie in [0, 1]");
    }
    if (unit_rubles_share + unit_millions_share > 1.0 ||
        government_share + religious_share + financial_share > 1.0) {
        throw PipelineError("CONFIG_INVALID", "share mix exceeds 1");
    }
    if (anomaly_count < 0) {
        throw PipelineError("CONFIG_INVALID", "anomaly_count must be non-negative");
    }
}

GenerateSummary generate(const CorpusPlan &plan, const std::filesystem::path &dir) {
    plan.validate();
    namespace fs = std::filesystem;
    fs::create_directories(dir / "registry");
    fs::create_directories(dir / "rosstat");
    fs::create_directories(dir / "fns");
    fs::create_directories(dir / "config");
    fs::create_directories(dir / "manifest");

    Rng rng(plan.seed);

    // --- firms ---
    std::vector<FirmTruth> firms(plan.n_firms);
    std::map<std::string, std::pair<std::string, int>> city_entries; // key -> (city text, rank)
    for (int i = 0; i < plan.n_firms; ++i) {
        FirmTruth &f = firms[i];
        f.index = static_cast<std::size_t>(i);
        const char *tax = kRegionTax[rng.range(0, kRegionTax.size() - 1)];
        f.inn = std::string(tax) + std::to_string(10000000 + i);
        f.ogrn = std::to_string(1000000000000LL + 77000000LL + i);
        f.name = "OOO Firma " + std::to_string(i + 1);

        const double r = rng.uniform01();
        if (r < plan.government_share) {
            f.cls = FirmClass::kGovernment;
        } else if (r < plan.government_share + plan.religious_share) {
            f.cls = FirmClass::kReligious;
        } else if (r < plan.government_share + plan.religious_share + plan.financial_share) {
            f.cls = FirmClass::kFinancial;
        }
        if (i == 1) {
            f.cls = FirmClass::kOrdinary; // carries the unmappable legal-form code
        }

        f.creation = Date{static_cast<int>(rng.range(plan.span_start - 4, plan.span_end)),
                          static_cast<int>(rng.range(1, 12)),
                          static_cast<int>(rng.range(1, 28))};
        if (rng.chance(0.15)) {
            const int dyear = static_cast<int>(rng.range(f.creation.year, plan.span_end));
            f.dissolution = dyear == f.creation.year
                                ? Date{dyear, 12, 28}
                                : Date{dyear, static_cast<int>(rng.range(1, 12)),
                                       static_cast<int>(rng.range(1, 28))};
        }
        f.form = rng.chance(0.35) ? Form::kSimplified : Form::kFull;
        const double ur = rng.uniform01();
        if (ur < plan.unit_rubles_share) {
            f.unit = Unit::kRubles;
        } else if (ur < plan.unit_rubles_share + plan.unit_millions_share) {
            f.unit = Unit::kMillions;
            f.lattice = 1000;
        }
        f.scale_units = (Money{64} << rng.range(0, 7)) + rng.range(0, 63);

        f.okved = kIndustries[rng.range(0, kIndustries.size() - 1)];
        f.okopf = kLlcOkopf;
        f.okfs = kPrivateOkfs;
        f.okogu = "4210014";
        switch (f.cls) {
        case FirmClass::kGovernment:
            if (rng.chance(0.5)) {
                f.okopf = kGovOkopf[rng.range(0, kGovOkopf.size() - 1)];
            } else {
                f.okfs = kGovOkfs[rng.range(0, kGovOkfs.size() - 1)];
            }
            f.okogu = "1400001";
            break;
        case FirmClass::kReligious: f.okopf = kReligiousOkopf; break;
        default: break;
        }
        f.okpo = std::to_string(10000000 + i);
        f.oktmo = std::to_string(45000000 + i % 1000000);

        f.snap_okved = f.okved;
        f.snap_okopf = f.okopf;
        if (f.cls == FirmClass::kOrdinary && rng.chance(0.10)) {
            for (const auto &[old_code, new_code] : kOkvedOldNew) {
                if (f.okved == new_code) {
                    f.snap_okved = old_code;
                    break;
                }
            }
        }
        if (rng.chance(f.cls == FirmClass::kOrdinary ? 0.05 : 0.3)) {
            if (f.okopf == kLlcOkopf) {
                f.snap_okopf = "65";
            } else if (f.okopf == kGovOkopf[0]) {
                f.snap_okopf = "81";
            } else if (f.okopf == kReligiousOkopf) {
                f.snap_okopf = "83";
            }
        }
        if (i == 1) {
            f.snap_okopf = kUnmappableOkopf;
            f.okopf = kUnmappableOkopf; // preserved by harmonization, flagged
            f.okopf_unmapped = true;
        }

        // geocoding plan
        const double gr = rng.uniform01();
        f.geo_class = gr < 0.70   ? GeoQuality::kHouse
                      : gr < 0.85 ? GeoQuality::kStreet
                      : gr < 0.95 ? GeoQuality::kCity
                                  : GeoQuality::kNone;
        f.address.region = std::string("Region ") + tax;
        if (f.geo_class == GeoQuality::kNone) {
            f.address.city = "Selo " + f.inn; // no service entry resolves here
        } else {
            f.address.city =
                std::string("Gorod ") + tax + "_" + std::to_string(rng.range(0, 2));
        }
        f.address.street = "Ulitsa " + f.inn;
        f.address.house = std::to_string(rng.range(1, 200));
        const double own_lat = 45.0 + ((i * 37) % 2000) * 0.01;
        const double own_lon = 30.0 + ((i * 101) % 8000) * 0.01;
        switch (f.geo_class) {
        case GeoQuality::kHouse:
            f.geo_rank = 30;
            f.geo_lat = two_decimals(own_lat);
            f.geo_lon = two_decimals(own_lon);
            break;
        case GeoQuality::kStreet:
            f.geo_rank = 26 + i % 4;
            f.geo_lat = two_decimals(own_lat);
            f.geo_lon = two_decimals(own_lon);
            break;
        case GeoQuality::kCity: {
            const std::string key = to_lower(f.address.region) + "|" + to_lower(f.address.city);
            auto it = city_entries.find(key);
            if (it == city_entries.end()) {
                Fnv1a h;
                h.update(key);
                const auto hv = h.digest();
                it = city_entries
                         .emplace(key, std::make_pair(two_decimals(45.0 + (hv % 2000) * 0.01) +
                                                          "," +
                                                          two_decimals(30.0 + ((hv >> 16) % 8000) *
                                                                                  0.01),
                                                      12 + static_cast<int>(hv % 14)))
                         .first;
            }
            const auto comma = it->second.first.find(',');
            f.geo_lat = it->second.first.substr(0, comma);
            f.geo_lon = it->second.first.substr(comma + 1);
            f.geo_rank = it->second.second;
            break;
        }
        case GeoQuality::kNone: break;
        }
        const int first_missing_year = std::max(plan.span_start, 2015);
        if (f.cls == FirmClass::kOrdinary && !f.dissolution &&
            first_missing_year <= plan.span_end - 1 && rng.chance(0.05)) {
            f.okved_missing_until =
                static_cast<int>(rng.range(first_missing_year, plan.span_end - 1));
        }
    }

    // --- ground-truth eligibility ---
    auto eligibility_of = [&](const FirmTruth &f,
                              int year) -> std::optional<ExemptCriteria> {
        switch (f.cls) {
        case FirmClass::kGovernment: return ExemptCriteria::kGovernment;
        case FirmClass::kReligious: return ExemptCriteria::kReligious;
        case FirmClass::kFinancial: return ExemptCriteria::kFinancial;
        case FirmClass::kOrdinary:
            if (f.creation.year == year && f.creation.month >= 10) {
                return ExemptCriteria::kNewlyIncorporatedQ4;
            }
            return std::nullopt;
        }
        return std::nullopt;
    };

    // --- filing and perturbation selections, year by year ---
    Selections sel;
    std::map<int, YearTally> tally;
    for (int year = plan.span_start; year <= plan.span_end; ++year) {
        std::vector<std::size_t> eligible_firms;
        std::vector<std::size_t> ineligible_firms;
        for (const auto &f : firms) {
            if (year < f.first_year(plan.span_start) || year > f.last_year(plan.span_end)) {
                continue;
            }
            if (eligibility_of(f, year)) {
                ineligible_firms.push_back(f.index);
            } else {
                eligible_firms.push_back(f.index);
            }
        }
        auto &t = tally[year];
        t.eligible = eligible_firms.size();
        if (year < std::max(kFirstFilingYear, plan.span_start)) {
            continue; // no statements exist for the first panel year
        }
        rng.shuffle(eligible_firms);
        const auto n_file = static_cast<std::size_t>(
            std::llround(plan.filing_rate * static_cast<double>(eligible_firms.size())));
        for (std::size_t k = 0; k < n_file; ++k) {
            sel.filed.insert({eligible_firms[k], year});
        }
        t.filed_eligible = n_file;
        rng.shuffle(ineligible_firms);
        const auto n_file2 = static_cast<std::size_t>(std::llround(
            plan.ineligible_filer_rate * static_cast<double>(ineligible_firms.size())));
        for (std::size_t k = 0; k < n_file2; ++k) {
            sel.filed.insert({ineligible_firms[k], year});
        }
        t.filed_all = n_file + n_file2;
    }

    // anomalies first so error planting can avoid them
    {
        std::vector<std::pair<std::size_t, int>> filed_keys(sel.filed.begin(),
                                                            sel.filed.end());
        rng.shuffle(filed_keys);
        const auto n = std::min<std::size_t>(plan.anomaly_count, filed_keys.size());
        for (std::size_t k = 0; k < n; ++k) {
            sel.anomalies.insert(filed_keys[k]);
        }
    }
    for (int year = std::max(kFirstFilingYear, plan.span_start); year <= plan.span_end;
         ++year) {
        std::vector<std::pair<std::size_t, int>> filed_y;
        for (const auto &key : sel.filed) {
            if (key.second == year && sel.anomalies.count(key) == 0) {
                filed_y.push_back(key);
            }
        }
        auto &t = tally[year];
        t.filed_nonanomalous = filed_y.size();
        rng.shuffle(filed_y);
        const auto n_err = static_cast<std::size_t>(std::llround(
            plan.articulation_error_rate * static_cast<double>(filed_y.size())));
        for (std::size_t k = 0; k < n_err; ++k) {
            sel.errors.insert(filed_y[k]);
        }
        t.errors = n_err;

        if (year >= kFnsFirstYear) {
            std::vector<std::pair<std::size_t, int>> filed_all_y;
            for (const auto &key : sel.filed) {
                if (key.second == year) {
                    filed_all_y.push_back(key);
                }
            }
            rng.shuffle(filed_all_y);
            const auto n_dup = static_cast<std::size_t>(
                std::llround(plan.duplicate_rate * static_cast<double>(filed_all_y.size())));
            for (std::size_t k = 0; k < n_dup; ++k) {
                sel.duplicates.insert(filed_all_y[k]);
            }
            std::vector<std::pair<std::size_t, int>> full_y;
            for (const auto &key : filed_all_y) {
                if (firms[key.first].form == Form::kFull) {
                    full_y.push_back(key);
                }
            }
            rng.shuffle(full_y);
            const auto n_dec = static_cast<std::size_t>(
                std::llround(plan.decoding_share * static_cast<double>(full_y.size())));
            for (std::size_t k = 0; k < n_dec; ++k) {
                sel.decodings.insert(full_y[k]);
            }
        }
    }

    // per filed firm-year: survivor submission dates and error deltas, drawn
    // deterministically from the key, independent of iteration order
    auto submission_of = [&](const FirmTruth &f, int year) -> Date {
        if (provider_for(year) == Provider::kRosstat) {
            return ingest::rosstat_submission_date(year);
        }
        Fnv1a h;
        h.update(f.inn);
        h.update(static_cast<std::int64_t>(year));
        h.update("submitted");
        Rng r(h.digest());
        return Date{year + 1, 3, static_cast<int>(r.range(10, 28))};
    };
    auto error_delta = [&](const FirmTruth &f, int year) -> Money {
        Fnv1a h;
        h.update(f.inn);
        h.update(static_cast<std::int64_t>(year));
        h.update("delta");
        Rng r(h.digest());
        return f.lattice == 1000 ? 1000 * r.range(1, 20) : r.range(5, 100);
    };

    // --- filed statement content (current-period columns as submitted) ---
    struct FiledContent {
        LineValues lines;           // thousands of rubles, post perturbations
        std::vector<Decoding> decs; // thousands of rubles
    };
    auto filed_content = [&](const FirmTruth &f, int year) -> FiledContent {
        FiledContent out;
        out.lines = true_lines(plan.seed, f, year);
        if (sel.decodings.count({f.index, year}) > 0) {
            const LineCode c4119 = LineCode::of("4119");
            const Money q = out.lines[c4119] / f.lattice;
            if (q >= 6) {
                const Money d1 = (q / 3) * f.lattice;
                const Money d2 = (q / 6) * f.lattice;
                out.lines[c4119] -= d1 + d2;
                out.decs.push_back({LineCode::of("4110"), "postuplenija po dogovoru 1", d1});
                out.decs.push_back({LineCode::of("4110"), "postuplenija po dogovoru 2", d2});
            }
        }
        if (sel.anomalies.count({f.index, year}) > 0) {
            for (auto &[code, value] : out.lines) {
                value *= 1000;
            }
            for (auto &d : out.decs) {
                d.value *= 1000;
            }
        }
        if (sel.errors.count({f.index, year}) > 0) {
            const LineCode target =
                f.form == Form::kFull ? LineCode::of("1100") : LineCode::of("1600");
            out.lines[target] += error_delta(f, year);
        }
        return out;
    };

    // --- registry snapshots ---
    int first_snapshot = std::max(plan.span_start, std::min(2015, plan.span_end));
    for (int as_of = first_snapshot; as_of <= plan.span_end; ++as_of) {
        registry::RegistrySnapshot snapshot;
        snapshot.as_of_year = as_of;
        for (const auto &f : firms) {
            if (f.creation.year > as_of) {
                continue;
            }
            registry::SnapshotFirm sf;
            sf.inn = f.inn;
            sf.ogrn = f.ogrn;
            sf.name = f.name;
            sf.creation_date = f.creation;
            sf.dissolution_date = f.dissolution;
            sf.okved = as_of <= f.okved_missing_until ? "" : f.snap_okved;
            sf.okopf = f.snap_okopf;
            sf.okfs = f.okfs;
            sf.okogu = f.okogu;
            sf.okpo = f.okpo;
            sf.oktmo = f.oktmo;
            sf.address = f.address;
            snapshot.firms.push_back(std::move(sf));
        }
        std::ofstream out(dir / "registry" /
                          ("snapshot_" + std::to_string(as_of) + ".xml"));
        out << registry::write_snapshot_xml(snapshot);
    }

    // --- statement files ---
    auto unit_value = [](const FirmTruth &f, Money thousands) -> Money {
        switch (f.unit) {
        case Unit::kRubles: return thousands * 1000;
        case Unit::kMillions: return thousands / 1000;
        case Unit::kThousands: return thousands;
        }
        return thousands;
    };
    auto convert_map = [&](const FirmTruth &f, const LineValues &lines) {
        LineValues out;
        for (const auto &[code, value] : lines) {
            out[code] = unit_value(f, value);
        }
        return out;
    };
    auto prior_map = [&](const FirmTruth &f, int year, int back,
                         Provider provider) -> LineValues {
        const int source_year = year - back;
        if (source_year < f.creation.year) {
            return {};
        }
        LineValues out;
        for (const auto &[code, value] : true_lines(plan.seed, f, source_year)) {
            if (back == 2) {
                if (code.section() != Section::kBalance) {
                    continue;
                }
            } else if (!section_in_prior1(code.section(), provider)) {
                continue;
            }
            out[code] = unit_value(f, value);
        }
        return out;
    };

    const std::vector<const char *> kTabularBalance = {
        "1100", "1110", "1150", "1170", "1180", "1200", "1210", "1230",
        "1250", "1300", "1310", "1370", "1400", "1410", "1420", "1450",
        "1500", "1510", "1520", "1550", "1600", "1700"};
    const std::vector<const char *> kTabularPnl = {"2110", "2120", "2100", "2210", "2220",
                                                   "2200", "2310", "2320", "2330", "2340",
                                                   "2350", "2300", "2410", "2400"};
    const std::vector<const char *> kTabularRest = {
        "3600", "4110", "4111", "4112", "4119", "4120", "4121", "4122", "4124",
        "4129", "4100", "4210", "4211", "4219", "4220", "4221", "4229", "4200",
        "4310", "4311", "4319", "4320", "4321", "4329", "4300", "4400", "4450",
        "4490", "4500"};
    std::vector<ingest::RosstatColumn> tabular_columns;
    for (const auto *code : kTabularBalance) {
        tabular_columns.push_back({LineCode::of(code), 0});
    }
    for (const auto *code : kTabularPnl) {
        tabular_columns.push_back({LineCode::of(code), 0});
    }
    for (const auto *code : kTabularRest) {
        tabular_columns.push_back({LineCode::of(code), 0});
    }
    for (const auto *code : kTabularBalance) {
        tabular_columns.push_back({LineCode::of(code), 1});
    }
    for (const auto *code : kTabularPnl) {
        tabular_columns.push_back({LineCode::of(code), 1});
    }
    for (const auto *code : kTabularBalance) {
        tabular_columns.push_back({LineCode::of(code), 2});
    }

    GenerateSummary summary;
    for (int year = std::max(kFirstFilingYear, plan.span_start); year <= plan.span_end;
         ++year) {
        const Provider provider = provider_for(year);
        std::vector<RawFiling> year_filings;
        for (const auto &f : firms) {
            if (sel.filed.count({f.index, year}) == 0) {
                continue;
            }
            FiledContent content = filed_content(f, year);
            RawFiling filing;
            filing.inn = f.inn;
            filing.year = year;
            filing.provider = provider;
            filing.form = f.form;
            filing.unit = f.unit;
            filing.submission_date = submission_of(f, year);
            filing.current = convert_map(f, content.lines);
            filing.prior1 = prior_map(f, year, 1, provider);
            filing.prior2 = prior_map(f, year, 2, provider);
            for (auto d : content.decs) {
                d.value = unit_value(f, d.value);
                filing.decodings.push_back(d);
            }
            year_filings.push_back(std::move(filing));
        }
        std::sort(year_filings.begin(), year_filings.end(),
                  [](const RawFiling &a, const RawFiling &b) { return a.inn < b.inn; });

        if (provider == Provider::kRosstat) {
            ingest::write_rosstat_csv(dir / "rosstat" /
                                          ("rosstat_" + std::to_string(year) + ".csv"),
                                      tabular_columns, year_filings);
        } else {
            for (const auto &filing : year_filings) {
                const FirmTruth &f = firms[static_cast<std::size_t>(
                    std::stoll(filing.inn.substr(2)) - 10000000)];
                std::vector<RawFiling> versions;
                if (sel.duplicates.count({f.index, year}) > 0) {
                    Fnv1a h;
                    h.update(f.inn);
                    h.update(static_cast<std::int64_t>(year));
                    h.update("dups");
                    Rng r(h.digest());
                    const int n_extra = static_cast<int>(r.range(1, 2));
                    for (int k = 0; k < n_extra; ++k) {
                        RawFiling earlier = filing;
                        earlier.submission_date =
                            Date{year + 1, 1 + k, static_cast<int>(r.range(1, 28))};
                        earlier.current[LineCode::of("2110")] +=
                            unit_value(f, 13 * f.lattice);
                        versions.push_back(std::move(earlier));
                        ++summary.n_duplicates;
                    }
                }
                versions.push_back(filing);
                for (std::size_t k = 0; k < versions.size(); ++k) {
                    std::ofstream out(dir / "fns" /
                                      (filing.inn + "_" + std::to_string(year) + "_" +
                                       std::to_string(k) + ".xml"));
                    out << ingest::write_fns_xml(versions[k]);
                }
            }
        }
    }

    // --- config tables ---
    {
        csv::Writer out(dir / "config" / "exemption_sets.csv");
        out.write({"criterion", "code_kind", "code"});
        for (const auto *code : kGovOkopf) {
            out.write({"GOVERNMENT", "okopf", code});
        }
        for (const auto *code : kGovOkfs) {
            out.write({"GOVERNMENT", "okfs", code});
        }
        out.write({"RELIGIOUS", "okopf", kReligiousOkopf});
        out.close();
    }
    {
        csv::Writer out(dir / "config" / "financial_register.csv");
        out.write({"year", "inn"});
        for (int year = plan.span_start; year <= plan.span_end; ++year) {
            for (const auto &f : firms) {
                if (f.cls == FirmClass::kFinancial && year >= f.first_year(plan.span_start) &&
                    year <= f.last_year(plan.span_end)) {
                    out.write({std::to_string(year), f.inn});
                }
            }
        }
        out.close();
    }
    {
        csv::Writer out(dir / "config" / "okved_correspondence.csv");
        out.write({"old_code", "new_code"});
        for (const auto &[old_code, new_code] : kOkvedOldNew) {
            out.write({old_code, new_code});
        }
        out.close();
    }
    {
        csv::Writer out(dir / "config" / "okopf_correspondence.csv");
        out.write({"old_code", "new_code"});
        out.write({"65", kLlcOkopf});
        out.write({"81", kGovOkopf[0]});
        out.write({"83", kReligiousOkopf});
        out.write({kUnmappableOkopf, ""}); // known-old code with no mapping
        out.close();
    }
    {
        csv::Writer out(dir / "config" / "geoservice.csv");
        out.write({"kind", "key", "lat", "lon", "rank"});
        std::vector<csv::Row> rows;
        for (const auto &f : firms) {
            const std::string region = to_lower(f.address.region);
            const std::string city = to_lower(f.address.city);
            const std::string street = to_lower(f.address.street);
            const std::string house = to_lower(f.address.house);
            if (f.geo_class == GeoQuality::kHouse) {
                rows.push_back({"house", region + "|" + city + "|" + street + "|" + house,
                                f.geo_lat, f.geo_lon, std::to_string(f.geo_rank)});
            } else if (f.geo_class == GeoQuality::kStreet) {
                rows.push_back({"street", region + "|" + city + "|" + street, f.geo_lat,
                                f.geo_lon, std::to_string(f.geo_rank)});
            }
        }
        for (const auto &[key, entry] : city_entries) {
            const auto comma = entry.first.find(',');
            rows.push_back({"city", key, entry.first.substr(0, comma),
                            entry.first.substr(comma + 1), std::to_string(entry.second)});
        }
        std::sort(rows.begin(), rows.end());
        for (const auto &row : rows) {
            out.write(row);
        }
        out.close();
    }

    // --- recoverability and manifest ---
    auto statement_sections = [&](const FirmTruth &f, int gap_year,
                                  int source_year) -> LineValues {
        LineValues out;
        for (const auto &[code, value] : true_lines(plan.seed, f, gap_year)) {
            if (source_year - gap_year == 2) {
                if (code.section() != Section::kBalance) {
                    continue;
                }
            } else if (!section_in_prior1(code.section(), provider_for(source_year))) {
                continue;
            }
            out[code] = value;
        }
        return out;
    };

    csv::Writer firm_years_out(dir / "manifest" / "firm_years.csv");
    firm_years_out.write({"inn", "year", "eligible", "exempt_criteria", "financial", "filed",
                          "provider", "gap_source", "submission_date", "n_duplicates",
                          "articulation_error", "anomalous", "decodings", "revenue",
                          "materials", "total_assets"});
    csv::Writer imputed_out(dir / "manifest" / "expected_imputed.csv");
    imputed_out.write({"inn", "year", "source_year", "form", "lines"});
    csv::Writer exclusions_out(dir / "config" / "exclusions.csv");
    exclusions_out.write({"inn", "year", "reason"});

    // external aggregates mirror the report sums; denominators are twice the
    // numerators so expected ratios are exactly one half
    std::map<int, std::array<Money, 3>> report_sums; // revenue, materials, value added

    for (const auto &f : firms) {
        for (int year = f.first_year(plan.span_start); year <= f.last_year(plan.span_end);
             ++year) {
            ++summary.n_universe_rows;
            const auto criteria = eligibility_of(f, year);
            const bool eligible = !criteria.has_value();
            const bool filed = sel.filed.count({f.index, year}) > 0;
            if (eligible) {
                ++summary.n_eligible_firm_years;
                if (filed) {
                    ++summary.n_filed_eligible;
                }
            } else if (filed) {
                ++summary.n_noneligible_filers;
            }
            const bool anomalous = sel.anomalies.count({f.index, year}) > 0;
            const bool error = sel.errors.count({f.index, year}) > 0;
            if (anomalous) {
                ++summary.n_anomalies;
                exclusions_out.write(
                    {f.inn, std::to_string(year), "implausible filed values"});
            }
            if (error) {
                ++summary.n_articulation_errors;
            }

            std::string gap_source;
            LineValues panel_lines;
            bool statement_in_panel = false;
            if (filed) {
                panel_lines = filed_content(f, year).lines;
                if (error) {
                    // the totals repair restores the perturbed summary line
                    panel_lines[f.form == Form::kFull ? LineCode::of("1100")
                                                      : LineCode::of("1600")] -=
                        error_delta(f, year);
                }
                statement_in_panel = true;
            } else {
                ++summary.n_gaps;
                const bool t1 = sel.filed.count({f.index, year + 1}) > 0 &&
                                year + 1 <= plan.span_end;
                const bool t2 = !t1 && year + 2 <= plan.span_end &&
                                sel.filed.count({f.index, year + 2}) > 0;
                if (t1 || t2) {
                    const int source_year = t1 ? year + 1 : year + 2;
                    gap_source = t1 ? "t1" : "t2";
                    panel_lines = statement_sections(f, year, source_year);
                    if (t1) {
                        ++summary.n_recoverable_t1;
                    } else {
                        ++summary.n_recoverable_t2;
                    }
                    imputed_out.write({f.inn, std::to_string(year),
                                       std::to_string(source_year), to_string(f.form),
                                       ingest::pack_lines(panel_lines)});
                    statement_in_panel = eligible; // ineligible non-filers drop out
                } else {
                    gap_source = "none";
                }
            }

            auto line_text = [&](const char *code) -> std::string {
                auto v = get_line(panel_lines, LineCode::of(code));
                return v ? std::to_string(*v) : "";
            };
            std::string revenue_text, materials_text, assets_text;
            if (statement_in_panel) {
                revenue_text = line_text("2110");
                materials_text = line_text("4121");
                assets_text = line_text("1600");
                if (!anomalous) {
                    auto rev = get_line(panel_lines, LineCode::of("2110"));
                    auto mat = get_line(panel_lines, LineCode::of("4121"));
                    auto &sums = report_sums[year];
                    if (rev && *rev > 0) {
                        sums[0] += *rev;
                    }
                    if (mat && *mat > 0) {
                        sums[1] += *mat;
                    }
                    if (rev && *rev > 0 && mat && *mat > 0) {
                        sums[2] += *rev - *mat;
                    }
                }
            }
            int n_dups = 0;
            if (sel.duplicates.count({f.index, year}) > 0) {
                Fnv1a h;
                h.update(f.inn);
                h.update(static_cast<std::int64_t>(year));
                h.update("dups");
                Rng r(h.digest());
                n_dups = static_cast<int>(r.range(1, 2));
            }
            firm_years_out.write(
                {f.inn, std::to_string(year), eligible ? "true" : "false",
                 criteria ? to_string(*criteria) : "",
                 f.cls == FirmClass::kFinancial ? "true" : "false",
                 filed ? "true" : "false", filed ? to_string(provider_for(year)) : "",
                 gap_source, filed ? to_string(submission_of(f, year)) : "",
                 std::to_string(n_dups), error ? "true" : "false",
                 anomalous ? "true" : "false",
                 sel.decodings.count({f.index, year}) > 0 ? "true" : "false", revenue_text,
                 materials_text, assets_text});
        }
    }
    firm_years_out.close();
    imputed_out.close();
    exclusions_out.close();

    {
        csv::Writer out(dir / "manifest" / "firms.csv");
        out.write({"inn", "ogrn", "class", "form", "unit", "creation_date",
                   "dissolution_date", "okved", "okopf", "okopf_unmapped", "okfs", "region",
                   "city", "street", "house", "geo_quality", "geo_rank", "lat", "lon"});
        for (const auto &f : firms) {
            out.write({f.inn, f.ogrn, to_string(f.cls), to_string(f.form), to_string(f.unit),
                       to_string(f.creation),
                       f.dissolution ? to_string(*f.dissolution) : "", f.okved, f.okopf,
                       f.okopf_unmapped ? "true" : "false", f.okfs, f.address.region,
                       f.address.city, f.address.street, f.address.house,
                       to_string(f.geo_class), std::to_string(f.geo_rank), f.geo_lat,
                       f.geo_lon});
        }
        out.close();
    }
    {
        csv::Writer out(dir / "manifest" / "rates.csv");
        out.write({"year", "n_eligible", "n_filed_eligible", "n_filed_all",
                   "n_filed_nonanomalous", "n_articulation_errors"});
        for (const auto &[year, t] : tally) {
            out.write({std::to_string(year), std::to_string(t.eligible),
                       std::to_string(t.filed_eligible), std::to_string(t.filed_all),
                       std::to_string(t.filed_nonanomalous), std::to_string(t.errors)});
        }
        out.close();
    }
    {
        csv::Writer out(dir / "config" / "external_aggregates.csv");
        out.write({"year", "gross_output", "intermediate_consumption", "gdp"});
        for (int year = plan.span_start; year <= plan.span_end; ++year) {
            auto it = report_sums.find(year);
            const Money rev = it == report_sums.end() ? 0 : it->second[0];
            const Money mat = it == report_sums.end() ? 0 : it->second[1];
            const Money va = it == report_sums.end() ? 0 : it->second[2];
            out.write({std::to_string(year), std::to_string(2 * rev), std::to_string(2 * mat),
                       std::to_string(2 * va)});
        }
        out.close();
    }
    {
        std::ofstream conf(dir / "pipeline.conf");
        conf << "span_start = " << plan.span_start << "\n";
        conf << "span_end = " << plan.span_end << "\n";
        conf << "workers = 1\n";
        conf << "out_dir = out\n";
        conf << "snapshots_dir = registry\n";
        conf << "rosstat_dir = rosstat\n";
        conf << "fns_dir = fns\n";
        conf << "okved_map = config/okved_correspondence.csv\n";
        conf << "okopf_map = config/okopf_correspondence.csv\n";
        conf << "exemption_sets = config/exemption_sets.csv\n";
        conf << "financial_register = config/financial_register.csv\n";
        conf << "exclusions = config/exclusions.csv\n";
        conf << "external_aggregates = config/external_aggregates.csv\n";
        conf << "geocode_cache = out/geocode_cache.csv\n";
        conf << "cell_size_km = 1\n";
        conf << "materials_code = 4121\n";
        conf << "n_top = 20\n";
    }
    return summary;
}

} // namespace finpanel::synth
