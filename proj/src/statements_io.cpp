#include "finpanel/statements_io.hpp"

#include "finpanel/csv.hpp"
#include "finpanel/ingest.hpp"
#include "finpanel/util.hpp"

namespace finpanel {

void write_statements_csv(const std::filesystem::path &path,
                          const std::vector<HarmonizedStatement> &statements) {
    csv::Writer out(path);
    out.write({"inn", "year", "form", "imputed", "imputation_source_year", "simplified",
               "articulated", "totals_adjustment", "lines"});
    for (const auto &s : statements) {
        out.write({s.inn, std::to_string(s.year), to_string(s.form),
                   s.imputed ? "true" : "false",
                   s.imputation_source_year ? std::to_string(*s.imputation_source_year) : "",
                   s.simplified ? "true" : "false", s.articulated ? "true" : "false",
                   s.totals_adjustment ? "true" : "false", ingest::pack_lines(s.lines)});
    }
    out.close();
}

std::vector<HarmonizedStatement> read_statements_csv(const std::filesystem::path &path) {
    auto rows = csv::read_all(path);
    std::vector<HarmonizedStatement> statements;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &row = rows[i];
        if (row.size() != 9) {
            throw PipelineError("MALFORMED_ROW",
                                path.string() + ": row " + std::to_string(i + 1));
        }
        HarmonizedStatement s;
        s.inn = row[0];
        s.year = static_cast<int>(parse_int(row[1]).value_or(0));
        s.form = parse_form(row[2]).value_or(Form::kFull);
        s.imputed = row[3] == "true";
        if (!row[4].empty()) {
            s.imputation_source_year = static_cast<int>(parse_int(row[4]).value_or(0));
        }
        s.simplified = row[5] == "true";
        s.articulated = row[6] == "true";
        s.totals_adjustment = row[7] == "true";
        s.lines = ingest::unpack_lines(row[8]);
        statements.push_back(std::move(s));
    }
    return statements;
}

} // namespace finpanel
