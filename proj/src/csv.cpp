#include "finpanel/csv.hpp"

#include "finpanel/util.hpp"

namespace finpanel::csv {

Reader::Reader(const std::filesystem::path &path) : in_(path, std::ios::binary) {
    if (!in_) {
        throw PipelineError("MISSING_INPUT", "cannot open " + path.string());
    }
}

bool Reader::next(Row &row) {
    row.clear();
    if (eof_) {
        return false;
    }
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in_.get()) != std::ifstream::traits_type::eof()) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') {
                field.pop_back();
            }
            row.push_back(std::move(field));
            return true;
        } else {
            field.push_back(static_cast<char>(c));
        }
    }
    eof_ = true;
    if (!any) {
        return false;
    }
    if (!field.empty() && field.back() == '\r') {
        field.pop_back();
    }
    row.push_back(std::move(field));
    return true;
}

std::vector<Row> read_all(const std::filesystem::path &path) {
    Reader reader(path);
    std::vector<Row> rows;
    Row row;
    while (reader.next(row)) {
        rows.push_back(row);
    }
    return rows;
}

std::string escape(std::string_view field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) {
        return std::string(field);
    }
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const Row &row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) {
            out.push_back(',');
        }
        out += escape(row[i]);
    }
    return out;
}

Writer::Writer(const std::filesystem::path &path) : path_(path) {
    tmp_path_ = path;
    tmp_path_ += ".tmp";
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw PipelineError("IO_ERROR", "cannot write " + tmp_path_.string());
    }
}

Writer::~Writer() {
    if (!closed_) {
        // Abandoned writer: drop the partial file.
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_path_, ec);
    }
}

void Writer::write(const Row &row) {
    out_ << join(row) << '\n';
    if (!out_) {
        throw PipelineError("IO_ERROR", "write failed on " + tmp_path_.string());
    }
}

void Writer::close() {
    if (closed_) {
        return;
    }
    out_.flush();
    if (!out_) {
        throw PipelineError("IO_ERROR", "flush failed on " + tmp_path_.string());
    }
    out_.close();
    std::filesystem::rename(tmp_path_, path_);
    closed_ = true;
}

} // namespace finpanel::csv
