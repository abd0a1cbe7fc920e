#pragma once

#include "finpanel/types.hpp"

#include <filesystem>
#include <vector>

namespace finpanel {

void write_statements_csv(const std::filesystem::path &path,
                          const std::vector<HarmonizedStatement> &statements);
std::vector<HarmonizedStatement> read_statements_csv(const std::filesystem::path &path);

} // namespace finpanel
