#include "finpanel/registry_ingest.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace finpanel::registry {

namespace {

std::string child_text(const xml::Node &node, std::string_view name) {
    const xml::Node *c = node.child(name);
    return c ? trim(c->text) : std::string();
}

} // namespace

std::optional<SnapshotFirm> parse_firm(const xml::Node &node, DiagnosticSink &sink) {
    auto malformed = [&](const std::string &why) -> std::optional<SnapshotFirm> {
        sink.add(Severity::kError, "MALFORMED_DOCUMENT", why, child_text(node, "inn"));
        return std::nullopt;
    };
    if (node.name != "firm") {
        return malformed("expected <firm>, got <" + node.name + ">");
    }
    SnapshotFirm firm;
    firm.inn = child_text(node, "inn");
    if (firm.inn.size() != 10 || !is_digits(firm.inn)) {
        return malformed("bad inn '" + firm.inn + "'");
    }
    firm.ogrn = child_text(node, "ogrn");
    if (firm.ogrn.size() != 13 || !is_digits(firm.ogrn)) {
        return malformed("bad ogrn '" + firm.ogrn + "'");
    }
    auto creation = parse_date(child_text(node, "creation_date"));
    if (!creation) {
        return malformed("bad creation_date '" + child_text(node, "creation_date") + "'");
    }
    firm.creation_date = *creation;
    const std::string dissolution = child_text(node, "dissolution_date");
    if (!dissolution.empty()) {
        auto d = parse_date(dissolution);
        if (!d) {
            return malformed("bad dissolution_date '" + dissolution + "'");
        }
        firm.dissolution_date = *d;
    }
    const xml::Node *address = node.child("address");
    if (!address) {
        return malformed("missing <address>");
    }
    firm.address = {address->attr("region"), address->attr("city"), address->attr("street"),
                    address->attr("house")};
    firm.name = child_text(node, "name");
    firm.okved = child_text(node, "okved");
    firm.okopf = child_text(node, "okopf");
    firm.okfs = child_text(node, "okfs");
    firm.okogu = child_text(node, "okogu");
    firm.okpo = child_text(node, "okpo");
    firm.oktmo = child_text(node, "oktmo");
    return firm;
}

namespace {

void add_firm(RegistrySnapshot &snapshot, std::unordered_map<std::string, std::size_t> &index,
              SnapshotFirm firm, DiagnosticSink &sink) {
    auto [it, inserted] = index.try_emplace(firm.inn, snapshot.firms.size());
    if (inserted) {
        snapshot.firms.push_back(std::move(firm));
    } else {
        sink.add(Severity::kWarning, "DUPLICATE_IDENTIFIER",
                 "inn repeated within snapshot; later document wins", firm.inn,
                 snapshot.as_of_year);
        snapshot.firms[it->second] = std::move(firm);
    }
}

} // namespace

RegistrySnapshot parse_snapshot(const std::filesystem::path &path, DiagnosticSink &sink) {
    xml::Node root = xml::parse_file(path.string());
    if (root.name != "snapshot") {
        throw PipelineError("MALFORMED_DOCUMENT",
                            path.string() + ": expected <snapshot> root");
    }
    RegistrySnapshot snapshot;
    auto year = parse_int(root.attr("as_of_year"));
    if (!year) {
        throw PipelineError("MALFORMED_DOCUMENT", path.string() + ": bad as_of_year");
    }
    snapshot.as_of_year = static_cast<int>(*year);
    std::unordered_map<std::string, std::size_t> index;
    for (const auto &child : root.children) {
        if (auto firm = parse_firm(child, sink)) {
            add_firm(snapshot, index, std::move(*firm), sink);
        }
    }
    return snapshot;
}

RegistrySnapshot parse_snapshot_dir(const std::filesystem::path &dir, int as_of_year,
                                    DiagnosticSink &sink) {
    RegistrySnapshot snapshot;
    snapshot.as_of_year = as_of_year;
    std::vector<std::filesystem::path> files;
    for (const auto &entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".xml") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::unordered_map<std::string, std::size_t> index;
    for (const auto &file : files) {
        try {
            if (auto firm = parse_firm(xml::parse_file(file.string()), sink)) {
                add_firm(snapshot, index, std::move(*firm), sink);
            }
        } catch (const xml::ParseError &e) {
            sink.add(Severity::kError, "MALFORMED_DOCUMENT",
                     file.filename().string() + ": " + e.what());
        }
    }
    return snapshot;
}

std::string write_snapshot_xml(const RegistrySnapshot &snapshot) {
    std::ostringstream out;
    out << "<snapshot as_of_year=\"" << snapshot.as_of_year << "\">\n";
    for (const auto &f : snapshot.firms) {
        out << "  <firm>\n";
        auto field = [&out](const char *tag, const std::string &value) {
            if (!value.empty()) {
                out << "    <" << tag << ">" << xml::escape_text(value) << "</" << tag
                    << ">\n";
            }
        };
        field("inn", f.inn);
        field("ogrn", f.ogrn);
        field("name", f.name);
        field("creation_date", to_string(f.creation_date));
        if (f.dissolution_date) {
            field("dissolution_date", to_string(*f.dissolution_date));
        }
        field("okved", f.okved);
        field("okopf", f.okopf);
        field("okfs", f.okfs);
        field("okogu", f.okogu);
        field("okpo", f.okpo);
        field("oktmo", f.oktmo);
        out << "    <address region=\"" << xml::escape_attr(f.address.region) << "\" city=\""
            << xml::escape_attr(f.address.city) << "\" street=\""
            << xml::escape_attr(f.address.street) << "\" house=\""
            << xml::escape_attr(f.address.house) << "\"/>\n";
        out << "  </firm>\n";
    }
    out << "</snapshot>\n";
    return out.str();
}

CorrespondenceTable load_correspondence(const std::filesystem::path &path) {
    CorrespondenceTable table;
    auto rows = csv::read_all(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 2 || row[0].empty()) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        table.mapping[row[0]] = row[1];
    }
    return table;
}

std::vector<FirmRecord> build_universe(const std::vector<RegistrySnapshot> &snapshots,
                                       int span_start, int span_end) {
    if (snapshots.empty()) {
        throw PipelineError("EMPTY_INPUT", "no registry snapshots");
    }
    // inn -> as_of_year -> fragment
    std::map<std::string, std::map<int, const SnapshotFirm *>> by_firm;
    for (const auto &snapshot : snapshots) {
        for (const auto &firm : snapshot.firms) {
            by_firm[firm.inn][snapshot.as_of_year] = &firm;
        }
    }
    if (by_firm.empty()) {
        throw PipelineError("EMPTY_INPUT", "snapshots contain no firms");
    }

    std::vector<FirmRecord> universe;
    for (const auto &[inn, fragments] : by_firm) {
        const SnapshotFirm &latest = *fragments.rbegin()->second;
        const int first_year = std::max(latest.creation_date.year, span_start);
        const int last_year = std::min(
            latest.dissolution_date ? latest.dissolution_date->year : span_end, span_end);
        for (int year = first_year; year <= last_year; ++year) {
            // nearest snapshot at or after the year, else nearest before
            auto it = fragments.lower_bound(year);
            if (it == fragments.end()) {
                it = std::prev(fragments.end());
            }
            const SnapshotFirm &src = *it->second;
            FirmRecord rec;
            rec.inn = inn;
            rec.ogrn = src.ogrn;
            rec.year = year;
            rec.name = src.name;
            rec.region = src.address.region;
            rec.region_taxcode = inn.substr(0, 2);
            rec.creation_date = latest.creation_date;
            rec.dissolution_date = latest.dissolution_date;
            rec.age = year - latest.creation_date.year;
            rec.okved = src.okved;
            rec.okopf = src.okopf;
            rec.okfs = src.okfs;
            rec.okogu = src.okogu;
            rec.okpo = src.okpo;
            rec.oktmo = src.oktmo;
            rec.address = src.address;
            universe.push_back(std::move(rec));
        }
    }
    return universe;
}

void harmonize_codes(FirmRecord &record, const CorrespondenceTable &okved_table,
                     const CorrespondenceTable &okopf_table) {
    auto apply = [](std::string &code, bool &unmapped, const CorrespondenceTable &table) {
        if (code.empty()) {
            return;
        }
        auto it = table.mapping.find(code);
        if (it == table.mapping.end()) {
            return; // already a post-change code
        }
        if (it->second.empty()) {
            unmapped = true; // known-old code without a mapping
        } else {
            code = it->second;
        }
    };
    apply(record.okved, record.okved_unmapped, okved_table);
    apply(record.okopf, record.okopf_unmapped, okopf_table);
}

void impute_missing_codes(std::vector<FirmRecord> &universe) {
    std::size_t i = 0;
    while (i < universe.size()) {
        std::size_t j = i;
        while (j < universe.size() && universe[j].inn == universe[i].inn) {
            ++j;
        }
        auto fill = [&](auto field) {
            // next-year values first (chained), then previous-year
            for (std::size_t k = j - i; k-- > 1;) {
                auto &cur = universe[i + k - 1].*field;
                const auto &next = universe[i + k].*field;
                if (cur.empty() && !next.empty()) {
                    cur = next;
                }
            }
            for (std::size_t k = 1; k < j - i; ++k) {
                auto &cur = universe[i + k].*field;
                const auto &prev = universe[i + k - 1].*field;
                if (cur.empty() && !prev.empty()) {
                    cur = prev;
                }
            }
        };
        fill(&FirmRecord::okved);
        fill(&FirmRecord::okopf);
        fill(&FirmRecord::okfs);
        i = j;
    }
}

void write_universe_csv(const std::filesystem::path &path,
                        const std::vector<FirmRecord> &records) {
    csv::Writer out(path);
    out.write({"inn", "year", "ogrn", "name", "region", "region_taxcode", "creation_date",
               "dissolution_date", "age", "okved", "okved_unmapped", "okopf",
               "okopf_unmapped", "okfs", "okogu", "okpo", "oktmo", "addr_region", "addr_city",
               "addr_street", "addr_house"});
    for (const auto &r : records) {
        out.write({r.inn, std::to_string(r.year), r.ogrn, r.name, r.region, r.region_taxcode,
                   to_string(r.creation_date),
                   r.dissolution_date ? to_string(*r.dissolution_date) : "",
                   std::to_string(r.age), r.okved, r.okved_unmapped ? "true" : "false",
                   r.okopf, r.okopf_unmapped ? "true" : "false", r.okfs, r.okogu, r.okpo,
                   r.oktmo, r.address.region, r.address.city, r.address.street,
                   r.address.house});
    }
    out.close();
}

std::vector<FirmRecord> read_universe_csv(const std::filesystem::path &path) {
    auto rows = csv::read_all(path);
    std::vector<FirmRecord> records;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 21) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        FirmRecord r;
        r.inn = row[0];
        r.year = static_cast<int>(parse_int(row[1]).value_or(0));
        r.ogrn = row[2];
        r.name = row[3];
        r.region = row[4];
        r.region_taxcode = row[5];
        r.creation_date = parse_date(row[6]).value_or(Date{});
        if (!row[7].empty()) {
            r.dissolution_date = parse_date(row[7]);
        }
        r.age = static_cast<int>(parse_int(row[8]).value_or(0));
        r.okved = row[9];
        r.okved_unmapped = row[10] == "true";
        r.okopf = row[11];
        r.okopf_unmapped = row[12] == "true";
        r.okfs = row[13];
        r.okogu = row[14];
        r.okpo = row[15];
        r.oktmo = row[16];
        r.address = {row[17], row[18], row[19], row[20]};
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace finpanel::registry
