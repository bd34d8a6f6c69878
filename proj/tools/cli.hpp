#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eddp::cli {

enum ExitCode : int { kOk = 0, kSolverError = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name). Results go to
/// `out`, one-line diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace eddp::cli
