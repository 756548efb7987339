#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpmtrack {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Runs the command-line frontend; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpmtrack
