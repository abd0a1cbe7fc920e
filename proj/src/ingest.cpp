#include "finpanel/ingest.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/util.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace finpanel::ingest {

namespace {

constexpr int kFnsFirstYear = 2019;
constexpr int kFnsLastYear = 2023;
constexpr int kRosstatFirstYear = 2012;
constexpr int kRosstatLastYear = 2018;

bool valid_inn(std::string_view inn) { return inn.size() == 10 && is_digits(inn); }

std::optional<Money> parse_money(std::string_view text) {
    return parse_int(trim(text));
}

} // namespace

std::optional<RawFiling> parse_fns_xml(const xml::Node &doc, DiagnosticSink &sink) {
    auto malformed = [&](const std::string &why) -> std::optional<RawFiling> {
        sink.add(Severity::kError, "MALFORMED_DOCUMENT", why, doc.attr("inn"));
        return std::nullopt;
    };
    if (doc.name != "filing") {
        return malformed("root element is <" + doc.name + ">, expected <filing>");
    }
    RawFiling filing;
    filing.provider = Provider::kFns;
    filing.inn = doc.attr("inn");
    if (!valid_inn(filing.inn)) {
        return malformed("bad inn '" + filing.inn + "'");
    }
    auto year = parse_int(doc.attr("year"));
    if (!year || *year < kFnsFirstYear || *year > kFnsLastYear) {
        return malformed("bad year '" + doc.attr("year") + "'");
    }
    filing.year = static_cast<int>(*year);
    auto form = parse_form(doc.attr("form"));
    if (!form) {
        return malformed("bad form '" + doc.attr("form") + "'");
    }
    filing.form = *form;
    auto unit = parse_unit(doc.attr("unit"));
    if (!unit) {
        return malformed("bad unit '" + doc.attr("unit") + "'");
    }
    filing.unit = *unit;
    auto submitted = parse_date(doc.attr("submitted"));
    if (!submitted) {
        return malformed("bad submission date '" + doc.attr("submitted") + "'");
    }
    filing.submission_date = *submitted;

    for (const auto &child : doc.children) {
        if (child.name == "decoding") {
            auto parent = LineCode::parse(child.attr("parent"));
            if (!parent) {
                sink.add(Severity::kWarning, "UNKNOWN_LINE_CODE",
                         "decoding parent '" + child.attr("parent") + "' not in registry",
                         filing.inn, filing.year);
                continue;
            }
            auto value = parse_money(child.text);
            if (!value) {
                return malformed("bad decoding value '" + child.text + "'");
            }
            filing.decodings.push_back({*parent, child.attr("label"), *value});
            continue;
        }
        int period = 0;
        std::string_view name = child.name;
        if (name.starts_with("prior1_")) {
            period = 1;
            name.remove_prefix(7);
        } else if (name.starts_with("prior2_")) {
            period = 2;
            name.remove_prefix(7);
        }
        if (!name.starts_with("line_")) {
            sink.add(Severity::kWarning, "UNKNOWN_LINE_CODE",
                     "unexpected element <" + child.name + ">", filing.inn, filing.year);
            continue;
        }
        name.remove_prefix(5);
        auto value = parse_money(child.text);
        if (!value) {
            return malformed("bad value '" + child.text + "' in <" + child.name + ">");
        }
        auto code = LineCode::parse(name);
        if (!code) {
            // Sub-lines we do not know are firm-specific detail: under a
            // decodable parent they are optional lines, elsewhere they are
            // reported and dropped.
            std::string family(name.substr(0, 3));
            family.push_back('0');
            auto parent = LineCode::parse(family);
            if (period == 0 && parent && optional_sum_for_parent(*parent)) {
                filing.decodings.push_back({*parent, std::string(child.name), *value});
            } else {
                sink.add(Severity::kWarning, "UNKNOWN_LINE_CODE",
                         "line code '" + std::string(name) + "' not in registry", filing.inn,
                         filing.year);
            }
            continue;
        }
        if (period == 2 && code->section() != Section::kBalance) {
            sink.add(Severity::kWarning, "UNKNOWN_LINE_CODE",
                     "prior2 column for non-balance code " + std::string(code->str()),
                     filing.inn, filing.year);
            continue;
        }
        LineValues &target =
            period == 0 ? filing.current : (period == 1 ? filing.prior1 : filing.prior2);
        target[*code] = *value;
    }
    return filing;
}

std::optional<RawFiling> parse_fns_xml(std::string_view text, DiagnosticSink &sink) {
    try {
        return parse_fns_xml(xml::parse(text), sink);
    } catch (const xml::ParseError &e) {
        sink.add(Severity::kError, "MALFORMED_DOCUMENT", e.what());
        return std::nullopt;
    }
}

std::string write_fns_xml(const RawFiling &filing) {
    std::ostringstream out;
    out << "<filing inn=\"" << filing.inn << "\" year=\"" << filing.year << "\" form=\""
        << to_string(filing.form) << "\" unit=\"" << to_string(filing.unit)
        << "\" submitted=\"" << to_string(filing.submission_date) << "\">\n";
    auto emit = [&out](const LineValues &lines, const char *prefix) {
        for (const auto &[code, value] : lines) {
            out << "  <" << prefix << "line_" << code.str() << ">" << value << "</" << prefix
                << "line_" << code.str() << ">\n";
        }
    };
    emit(filing.current, "");
    emit(filing.prior1, "prior1_");
    emit(filing.prior2, "prior2_");
    for (const auto &d : filing.decodings) {
        out << "  <decoding parent=\"" << d.parent.str() << "\" label=\""
            << xml::escape_attr(d.label) << "\">" << d.value << "</decoding>\n";
    }
    out << "</filing>\n";
    return out.str();
}

Date rosstat_submission_date(int year) { return Date{year + 1, 3, 31}; }

std::vector<std::string> rosstat_header(const std::vector<RosstatColumn> &columns) {
    std::vector<std::string> header = {"inn", "year", "form", "unit"};
    for (const auto &col : columns) {
        std::string name(col.code.str());
        if (col.period == 1) {
            name += "_p1";
        } else if (col.period == 2) {
            name += "_p2";
        }
        header.push_back(std::move(name));
    }
    return header;
}

std::vector<RawFiling> parse_rosstat_csv(const std::filesystem::path &path, int year,
                                         DiagnosticSink &sink) {
    if (year < kRosstatFirstYear || year > kRosstatLastYear) {
        throw PipelineError("CONFIG_INVALID", "tabular provider year " + std::to_string(year) +
                                                  " outside 2012-2018");
    }
    csv::Reader reader(path);
    csv::Row header;
    if (!reader.next(header)) {
        throw PipelineError("MISSING_INPUT", "empty file " + path.string());
    }
    if (header.size() < 4 || header[0] != "inn" || header[1] != "year" || header[2] != "form" ||
        header[3] != "unit") {
        throw PipelineError("MALFORMED_ROW", "bad header in " + path.string());
    }
    struct Column {
        std::optional<LineCode> code;
        int period = 0;
    };
    std::vector<Column> columns;
    for (std::size_t i = 4; i < header.size(); ++i) {
        std::string_view name = header[i];
        Column col;
        if (name.ends_with("_p1")) {
            col.period = 1;
            name.remove_suffix(3);
        } else if (name.ends_with("_p2")) {
            col.period = 2;
            name.remove_suffix(3);
        }
        col.code = LineCode::parse(name);
        if (!col.code) {
            sink.add(Severity::kWarning, "UNKNOWN_LINE_CODE",
                     "column '" + header[i] + "' in " + path.filename().string() +
                         " not in registry; ignored");
        } else if (col.period == 2 && col.code->section() != Section::kBalance) {
            sink.add(Severity::kWarning, "UNKNOWN_LINE_CODE",
                     "prior2 column for non-balance code " + header[i] + "; ignored");
            col.code = std::nullopt;
        }
        columns.push_back(col);
    }

    std::vector<RawFiling> filings;
    csv::Row row;
    std::size_t line_no = 1;
    while (reader.next(row)) {
        ++line_no;
        auto malformed = [&](const std::string &why) {
            sink.add(Severity::kError, "MALFORMED_ROW",
                     path.filename().string() + ":" + std::to_string(line_no) + " " + why,
                     row.empty() ? "" : row[0], year);
        };
        if (row.size() != header.size()) {
            malformed("expected " + std::to_string(header.size()) + " columns, got " +
                      std::to_string(row.size()));
            continue;
        }
        RawFiling filing;
        filing.provider = Provider::kRosstat;
        filing.inn = row[0];
        if (!valid_inn(filing.inn)) {
            malformed("bad inn '" + row[0] + "'");
            continue;
        }
        auto row_year = parse_int(row[1]);
        if (!row_year || *row_year != year) {
            malformed("row year '" + row[1] + "' does not match file year");
            continue;
        }
        filing.year = year;
        auto form = parse_form(row[2]);
        auto unit = parse_unit(row[3]);
        if (!form || !unit) {
            malformed("bad form/unit '" + row[2] + "'/'" + row[3] + "'");
            continue;
        }
        filing.form = *form;
        filing.unit = *unit;
        filing.submission_date = rosstat_submission_date(year);
        bool bad_cell = false;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            const auto &col = columns[i];
            const std::string &cell = row[4 + i];
            if (!col.code || cell.empty()) {
                continue;
            }
            auto value = parse_money(cell);
            if (!value) {
                malformed("bad value '" + cell + "' in column " + header[4 + i]);
                bad_cell = true;
                break;
            }
            if (*value == 0) {
                // this provider writes zeros in place of missing values
                continue;
            }
            LineValues &target = col.period == 0
                                     ? filing.current
                                     : (col.period == 1 ? filing.prior1 : filing.prior2);
            target[*col.code] = *value;
        }
        if (!bad_cell) {
            filings.push_back(std::move(filing));
        }
    }
    return filings;
}

void write_rosstat_csv(const std::filesystem::path &path,
                       const std::vector<RosstatColumn> &columns,
                       const std::vector<RawFiling> &filings) {
    csv::Writer out(path);
    out.write(rosstat_header(columns));
    for (const auto &filing : filings) {
        csv::Row row = {filing.inn, std::to_string(filing.year), to_string(filing.form),
                        to_string(filing.unit)};
        for (const auto &col : columns) {
            const LineValues &source = col.period == 0
                                           ? filing.current
                                           : (col.period == 1 ? filing.prior1 : filing.prior2);
            auto v = get_line(source, col.code);
            row.push_back(std::to_string(v.value_or(0)));
        }
        out.write(row);
    }
    out.close();
}

void normalize_units(RawFiling &filing) {
    if (filing.unit == Unit::kThousands) {
        return;
    }
    auto convert = [&](Money v) -> Money {
        if (filing.unit == Unit::kMillions) {
            return v * 1000;
        }
        // rubles -> thousands, round half away from zero
        return (v >= 0 ? v + 500 : v - 500) / 1000;
    };
    for (LineValues *lines : {&filing.current, &filing.prior1, &filing.prior2}) {
        for (auto &[code, value] : *lines) {
            value = convert(value);
        }
    }
    for (auto &d : filing.decodings) {
        d.value = convert(d.value);
    }
    filing.unit = Unit::kThousands;
}

void aggregate_decodings(RawFiling &filing) {
    std::map<LineCode, Money> sums;
    for (const auto &d : filing.decodings) {
        if (auto x = optional_sum_for_parent(d.parent)) {
            sums[*x] += d.value;
        }
        // balance / profit-and-loss decodings would only repeat the value
        // of the line they detail; dropped
    }
    for (const auto &[x_code, sum] : sums) {
        filing.current[x_code] = sum;
    }
    filing.decodings.clear();
}

void consolidate_tax_lines(LineValues &lines, int year) {
    if (year < 2020) {
        // the 2019 filings mix both forms indistinguishably; left as filed
        return;
    }
    auto current_tax = get_line(lines, LineCode::of("2411"));
    auto deferred_tax = get_line(lines, LineCode::of("2412"));
    if (!current_tax && !deferred_tax) {
        return;
    }
    lines[LineCode::of("2410")] = current_tax.value_or(0) + deferred_tax.value_or(0);
}

void harmonize_filing(RawFiling &filing) {
    normalize_units(filing);
    aggregate_decodings(filing);
    consolidate_tax_lines(filing.current, filing.year);
}

std::uint64_t content_hash(const RawFiling &filing) {
    Fnv1a h;
    h.update(filing.inn);
    h.update(static_cast<std::int64_t>(filing.year));
    h.update(to_string(filing.provider));
    h.update(to_string(filing.form));
    h.update(to_string(filing.unit));
    h.update(to_string(filing.submission_date));
    auto fold = [&h](const LineValues &lines, std::string_view tag) {
        h.update(tag);
        for (const auto &[code, value] : lines) {
            h.update(code.str());
            h.update(value);
        }
    };
    fold(filing.current, "c");
    fold(filing.prior1, "p1");
    fold(filing.prior2, "p2");
    h.update("d");
    for (const auto &d : filing.decodings) {
        h.update(d.parent.str());
        h.update(d.label);
        h.update(d.value);
    }
    return h.digest();
}

RawFiling dedupe_filings(const std::vector<RawFiling> &group) {
    if (group.empty()) {
        throw PipelineError("EMPTY_GROUP", "dedupe over empty filing group");
    }
    const RawFiling *best = &group[0];
    std::uint64_t best_hash = content_hash(*best);
    for (std::size_t i = 1; i < group.size(); ++i) {
        const RawFiling &candidate = group[i];
        if (candidate.submission_date > best->submission_date) {
            best = &candidate;
            best_hash = content_hash(candidate);
        } else if (candidate.submission_date == best->submission_date) {
            const std::uint64_t h = content_hash(candidate);
            if (h > best_hash) {
                best = &candidate;
                best_hash = h;
            }
        }
    }
    return *best;
}

std::vector<RawFiling> ingest_directories(const std::filesystem::path &rosstat_dir,
                                          const std::filesystem::path &fns_dir, int workers,
                                          DiagnosticSink &sink) {
    namespace fs = std::filesystem;
    std::vector<fs::path> rosstat_files;
    std::vector<fs::path> fns_files;
    if (!rosstat_dir.empty() && fs::exists(rosstat_dir)) {
        for (const auto &entry : fs::directory_iterator(rosstat_dir)) {
            if (entry.path().extension() == ".csv") {
                rosstat_files.push_back(entry.path());
            }
        }
    }
    if (!fns_dir.empty() && fs::exists(fns_dir)) {
        for (const auto &entry : fs::directory_iterator(fns_dir)) {
            if (entry.path().extension() == ".xml") {
                fns_files.push_back(entry.path());
            }
        }
    }
    std::sort(rosstat_files.begin(), rosstat_files.end());
    std::sort(fns_files.begin(), fns_files.end());
    if (rosstat_files.empty() && fns_files.empty()) {
        throw PipelineError("MISSING_INPUT", "no statement files under " +
                                                 rosstat_dir.string() + " or " +
                                                 fns_dir.string());
    }

    std::vector<RawFiling> all;
    std::mutex mutex;

    // tabular files are few and large; one worker each is enough
    for (const auto &path : rosstat_files) {
        const std::string stem = path.stem().string();
        const auto underscore = stem.rfind('_');
        auto year = underscore == std::string::npos
                        ? std::nullopt
                        : parse_int(std::string_view(stem).substr(underscore + 1));
        if (!year) {
            sink.add(Severity::kWarning, "MALFORMED_DOCUMENT",
                     "cannot infer year from file name " + path.filename().string());
            continue;
        }
        auto filings = parse_rosstat_csv(path, static_cast<int>(*year), sink);
        for (auto &f : filings) {
            harmonize_filing(f);
            all.push_back(std::move(f));
        }
    }

    std::vector<std::vector<RawFiling>> parsed(fns_files.size());
    std::vector<DiagnosticSink> sinks(fns_files.size());
    parallel_chunks(fns_files.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto filing = [&]() -> std::optional<RawFiling> {
                try {
                    return parse_fns_xml(xml::parse_file(fns_files[i].string()), sinks[i]);
                } catch (const xml::ParseError &e) {
                    sinks[i].add(Severity::kError, "MALFORMED_DOCUMENT",
                                 fns_files[i].filename().string() + ": " + e.what());
                    return std::nullopt;
                }
            }();
            if (filing) {
                harmonize_filing(*filing);
                parsed[i].push_back(std::move(*filing));
            }
        }
    });
    for (std::size_t i = 0; i < fns_files.size(); ++i) {
        for (const auto &d : sinks[i].items()) {
            sink.add(d.severity, d.code, d.message, d.inn, d.year);
        }
        for (auto &f : parsed[i]) {
            all.push_back(std::move(f));
        }
    }

    std::map<std::pair<std::string, int>, std::vector<RawFiling>> groups;
    for (auto &f : all) {
        groups[{f.inn, f.year}].push_back(std::move(f));
    }
    std::vector<RawFiling> deduped;
    deduped.reserve(groups.size());
    for (auto &[key, group] : groups) {
        deduped.push_back(dedupe_filings(group));
    }
    return deduped;
}

std::string pack_lines(const LineValues &lines) {
    std::string out;
    for (const auto &[code, value] : lines) {
        if (!out.empty()) {
            out.push_back(';');
        }
        out += code.str();
        out.push_back(':');
        out += std::to_string(value);
    }
    return out;
}

LineValues unpack_lines(std::string_view packed) {
    LineValues lines;
    if (packed.empty()) {
        return lines;
    }
    for (const auto &item : split(packed, ';')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw PipelineError("MALFORMED_ROW", "bad packed line '" + item + "'");
        }
        auto code = LineCode::parse(std::string_view(item).substr(0, colon));
        auto value = parse_int(std::string_view(item).substr(colon + 1));
        if (!code || !value) {
            throw PipelineError("MALFORMED_ROW", "bad packed line '" + item + "'");
        }
        lines[*code] = *value;
    }
    return lines;
}

void write_filings_csv(const std::filesystem::path &path,
                       const std::vector<RawFiling> &filings) {
    csv::Writer out(path);
    out.write({"inn", "year", "provider", "form", "unit", "submission_date", "current",
               "prior1", "prior2"});
    for (const auto &f : filings) {
        out.write({f.inn, std::to_string(f.year), to_string(f.provider), to_string(f.form),
                   to_string(f.unit), to_string(f.submission_date), pack_lines(f.current),
                   pack_lines(f.prior1), pack_lines(f.prior2)});
    }
    out.close();
}

std::vector<RawFiling> read_filings_csv(const std::filesystem::path &path) {
    auto rows = csv::read_all(path);
    std::vector<RawFiling> filings;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 9) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        RawFiling f;
        f.inn = row[0];
        f.year = static_cast<int>(parse_int(row[1]).value_or(0));
        f.provider = parse_provider(row[2]).value_or(Provider::kFns);
        f.form = parse_form(row[3]).value_or(Form::kFull);
        f.unit = parse_unit(row[4]).value_or(Unit::kThousands);
        f.submission_date = parse_date(row[5]).value_or(Date{});
        f.current = unpack_lines(row[6]);
        f.prior1 = unpack_lines(row[7]);
        f.prior2 = unpack_lines(row[8]);
        filings.push_back(std::move(f));
    }
    return filings;
}

} // namespace finpanel::ingest
