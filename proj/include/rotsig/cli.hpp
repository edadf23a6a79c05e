#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rotsig {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitUsage = 2, kExitData = 3 };

/// Entry point of the `rotsig` tool; args exclude the program name. Errors are
/// written to `err` as one JSON object per line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rotsig
