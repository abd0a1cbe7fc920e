#pragma once

#include "finpanel/diagnostics.hpp"
#include "finpanel/types.hpp"
#include "finpanel/xml.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace finpanel::registry {

/// One raw firm document out of a snapshot.
struct SnapshotFirm {
    std::string inn;
    std::string ogrn;
    std::string name;
    Date creation_date;
    std::optional<Date> dissolution_date;
    std::string okved;
    std::string okopf;
    std::string okfs;
    std::string okogu;
    std::string okpo;
    std::string oktmo;
    StructuredAddress address;
};

struct RegistrySnapshot {
    int as_of_year = 0;
    std::vector<SnapshotFirm> firms;
};

/// Parses one firm element. Returns nullopt after a MALFORMED_DOCUMENT
/// diagnostic (missing or syntactically invalid identifiers/dates).
std::optional<SnapshotFirm> parse_firm(const xml::Node &node, DiagnosticSink &sink);

/// Snapshot file: <snapshot as_of_year="..."> with <firm> children. Within
/// one snapshot a repeated inn keeps the later document (diagnostic).
RegistrySnapshot parse_snapshot(const std::filesystem::path &path, DiagnosticSink &sink);

/// Directory form: one <firm> file per firm, lexicographic file order.
RegistrySnapshot parse_snapshot_dir(const std::filesystem::path &dir, int as_of_year,
                                    DiagnosticSink &sink);

std::string write_snapshot_xml(const RegistrySnapshot &snapshot);

/// old_code -> new_code. An empty new_code declares a known-old code with
/// no mapping (harmonization preserves it and sets the unmapped flag).
struct CorrespondenceTable {
    std::map<std::string, std::string> mapping;
};

CorrespondenceTable load_correspondence(const std::filesystem::path &path);

/// Flat firm-year table over the span. A firm appears from its creation
/// year through its dissolution year (or span end); attributes come from
/// the nearest snapshot at or after the year, falling back to the nearest
/// one before. Lifecycle dates are always taken from the latest snapshot.
/// Throws EMPTY_INPUT.
std::vector<FirmRecord> build_universe(const std::vector<RegistrySnapshot> &snapshots,
                                       int span_start, int span_end);

/// Expresses okved/okopf in the post-change classifiers; declared-unmappable
/// old codes are preserved with the unmapped flag set.
void harmonize_codes(FirmRecord &record, const CorrespondenceTable &okved_table,
                     const CorrespondenceTable &okopf_table);

/// Fills missing okved/okopf/okfs per firm from the next year when present
/// there (chained), else from the previous year. Idempotent.
void impute_missing_codes(std::vector<FirmRecord> &universe);

void write_universe_csv(const std::filesystem::path &path,
                        const std::vector<FirmRecord> &records);
std::vector<FirmRecord> read_universe_csv(const std::filesystem::path &path);

} // namespace finpanel::registry
