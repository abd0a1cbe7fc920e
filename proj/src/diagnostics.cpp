#include "finpanel/diagnostics.hpp"

#include "finpanel/csv.hpp"

namespace finpanel {

std::string to_string(Severity s) {
    switch (s) {
    case Severity::kInfo: return "info";
    case Severity::kWarning: return "warning";
    case Severity::kError: return "error";
    }
    return "unknown";
}

std::size_t DiagnosticSink::count(std::string_view code) const {
    std::size_t n = 0;
    for (const auto &d : items_) {
        if (d.code == code) {
            ++n;
        }
    }
    return n;
}

void DiagnosticSink::write_csv(const std::filesystem::path &path) const {
    csv::Writer out(path);
    out.write({"severity", "inn", "year", "code", "message"});
    for (const auto &d : items_) {
        out.write({to_string(d.severity), d.inn, d.year == 0 ? "" : std::to_string(d.year),
                   d.code, d.message});
    }
    out.close();
}

} // namespace finpanel
