#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace finpanel::csv {

/// One parsed record. Quoted fields may contain separators, quotes and
/// newlines per RFC 4180; CRLF input is tolerated.
using Row = std::vector<std::string>;

class Reader {
  public:
    explicit Reader(const std::filesystem::path &path);

    /// Reads the next record into row. Returns false at end of input.
    bool next(Row &row);

    bool ok() const { return static_cast<bool>(in_) || eof_; }

  private:
    std::ifstream in_;
    bool eof_ = false;
};

std::vector<Row> read_all(const std::filesystem::path &path);

std::string escape(std::string_view field);
std::string join(const Row &row);

/// Deterministic writer: LF line endings, minimal quoting. Writes to a
/// temporary file and renames on close so failed stages leave no partial
/// output behind.
class Writer {
  public:
    explicit Writer(const std::filesystem::path &path);
    ~Writer();

    Writer(const Writer &) = delete;
    Writer &operator=(const Writer &) = delete;

    void write(const Row &row);
    void close();

  private:
    std::filesystem::path path_;
    std::filesystem::path tmp_path_;
    std::ofstream out_;
    bool closed_ = false;
};

} // namespace finpanel::csv
