#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wmsmon {

/// Exit codes of the wmsmon command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Runs the wmsmon command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wmsmon
