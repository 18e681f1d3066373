#pragma once

#include <string>
#include <vector>

namespace afdx::cli {

/// Runs one subcommand (validate, generate, simulate, analyze,
/// policing-check). Exit codes: 0 success, 1 domain violation found,
/// 2 usage or I/O error.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace afdx::cli
