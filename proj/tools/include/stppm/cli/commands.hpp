#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stppm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

/// Entry point of the `stppm` tool: parses argv, dispatches the subcommand
/// and maps failures to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stppm::cli
