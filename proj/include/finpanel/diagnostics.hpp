#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace finpanel {

enum class Severity { kInfo, kWarning, kError };

std::string to_string(Severity s);

/// One machine-readable issue. Non-fatal problems (skipped documents,
/// unmapped codes, unmatched exclusions) accumulate here instead of
/// aborting the stage.
struct Diagnostic {
    Severity severity = Severity::kWarning;
    std::string inn;
    int year = 0; // 0 when not applicable
    std::string code;
    std::string message;
};

class DiagnosticSink {
  public:
    void add(Severity severity, std::string code, std::string message, std::string inn = "",
             int year = 0) {
        items_.push_back({severity, std::move(inn), year, std::move(code), std::move(message)});
    }

    const std::vector<Diagnostic> &items() const { return items_; }
    bool empty() const { return items_.empty(); }
    std::size_t count(std::string_view code) const;

    /// severity,inn,year,code,message — one line per issue.
    void write_csv(const std::filesystem::path &path) const;

  private:
    std::vector<Diagnostic> items_;
};

} // namespace finpanel
