#pragma once

#include "finpanel/util.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finpanel {

enum class Section { kBalance, kProfitLoss, kEquity, kCashFlow, kProperUse };
enum class Provider { kRosstat, kFns };
enum class Form { kFull, kSimplified };
enum class Unit { kRubles, kThousands, kMillions };
enum class ExemptCriteria { kGovernment, kReligious, kFinancial, kNewlyIncorporatedQ4 };
enum class GeoQuality { kHouse, kStreet, kCity, kNone };

std::string to_string(Section s);
std::string to_string(Provider p);
std::string to_string(Form f);
std::string to_string(Unit u);
std::string to_string(ExemptCriteria c);
std::string to_string(GeoQuality q);

std::optional<Provider> parse_provider(std::string_view s);
std::optional<Form> parse_form(std::string_view s);
std::optional<Unit> parse_unit(std::string_view s);
std::optional<ExemptCriteria> parse_exempt_criteria(std::string_view s);
std::optional<GeoQuality> parse_geo_quality(std::string_view s);

/// Statement line identifier from the closed registry: four digits
/// ("1100") or three digits plus 'x' ("411x") for the optional-line sums in
/// the cash-flow and changes-in-equity sections. Values are indices into
/// the registry table, so copies are cheap and ordering follows the
/// canonical output column order.
class LineCode {
  public:
    /// Returns the code for `text`, or nullopt when it is not in the registry.
    static std::optional<LineCode> parse(std::string_view text);

    /// Registry lookup that throws on unknown codes; for literals.
    static LineCode of(std::string_view text);

    std::string_view str() const;
    Section section() const;

    /// True for the x-suffix codes (sums of firm-named optional lines).
    bool is_optional_sum() const;

    /// True for codes in the published output schema; the handful of codes
    /// that appear only in articulation equations are valid but unexported.
    bool exported() const;

    std::uint16_t index() const { return idx_; }

    auto operator<=>(const LineCode &) const = default;

  private:
    friend const std::vector<LineCode> &line_registry();
    explicit LineCode(std::uint16_t idx) : idx_(idx) {}
    std::uint16_t idx_;
};

/// The closed line-code registry in canonical order: the 187 published
/// lines first (output column order), then the equation-only codes.
const std::vector<LineCode> &line_registry();

/// x-code for a decodable parent (4110 -> 411x), nullopt for parents whose
/// sections do not articulate optional lines.
std::optional<LineCode> optional_sum_for_parent(LineCode parent);

/// Parent total for an x-code (411x -> 4110).
LineCode parent_of_optional_sum(LineCode x_code);

/// Amounts are 64-bit signed integers in thousands of rubles; missing and
/// zero are distinct, so maps carry only present values (a present zero is
/// a filed zero).
using Money = std::int64_t;
using LineValues = std::map<LineCode, Money>;

inline std::optional<Money> get_line(const LineValues &lines, LineCode code) {
    auto it = lines.find(code);
    if (it == lines.end()) {
        return std::nullopt;
    }
    return it->second;
}

struct Decoding {
    LineCode parent;
    std::string label;
    Money value = 0;

    auto operator<=>(const Decoding &) const = default;
};

/// One parsed statement document for one firm-year from one provider.
struct RawFiling {
    std::string inn;
    int year = 0;
    Provider provider = Provider::kFns;
    Form form = Form::kFull;
    Unit unit = Unit::kThousands;
    Date submission_date;
    LineValues current;
    LineValues prior1; // previous-year columns
    LineValues prior2; // two-years-prior columns, balance-sheet codes only
    std::vector<Decoding> decodings;

    bool operator==(const RawFiling &) const = default;
};

/// Canonical statement: lines in thousands of rubles plus provenance flags.
struct HarmonizedStatement {
    std::string inn;
    int year = 0;
    Form form = Form::kFull;
    LineValues lines;
    bool imputed = false;
    std::optional<int> imputation_source_year;
    bool simplified = false;
    bool totals_adjustment = false;
    bool articulated = false;

    bool operator==(const HarmonizedStatement &) const = default;
};

struct StructuredAddress {
    std::string region;
    std::string city;
    std::string street;
    std::string house;

    bool operator==(const StructuredAddress &) const = default;
};

/// One firm-year row of registry attributes.
struct FirmRecord {
    std::string inn;
    std::string ogrn;
    int year = 0;
    std::string name;
    std::string region;
    std::string region_taxcode; // first two INN digits
    Date creation_date;
    std::optional<Date> dissolution_date;
    int age = 0;
    std::string okved;
    std::string okopf;
    std::string okfs;
    std::string okogu;
    std::string okpo;
    std::string oktmo;
    bool okved_unmapped = false;
    bool okopf_unmapped = false;
    StructuredAddress address;

    bool operator==(const FirmRecord &) const = default;
};

struct EligibilityDecision {
    bool eligible = true;
    std::optional<ExemptCriteria> exempt_criteria;

    bool operator==(const EligibilityDecision &) const = default;
};

struct GeoLocation {
    double lon = 0.0;
    double lat = 0.0;
    int address_rank = 0;
    GeoQuality quality = GeoQuality::kNone;

    bool operator==(const GeoLocation &) const = default;
};

/// Address-rank bands: 30 house, 26-29 street, 12-25 city, otherwise none.
GeoQuality quality_for_rank(int rank);

/// The assembled output record.
struct PanelRow {
    FirmRecord firm;
    EligibilityDecision eligibility;
    bool financial = false;
    bool filed = false;
    std::optional<HarmonizedStatement> statement;
    std::optional<GeoLocation> geo;
    bool anomalous = false;
};

/// NACE Rev.2 section letter for a 2-digit industry division, empty when
/// the code has no digits to classify.
std::string okved_section(std::string_view okved);

} // namespace finpanel
