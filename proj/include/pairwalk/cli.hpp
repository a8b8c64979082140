#pragma once

#include <string>
#include <vector>

namespace pairwalk::cli {

// Batch front end; returns the process exit code (0 success, 1 usage error,
// 2 validation failure). args excludes the program name.
int run(const std::vector<std::string>& args);

} // namespace pairwalk::cli
