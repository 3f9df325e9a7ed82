#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cpd {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitUsage = 2, kExitDomain = 3 };

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpd
