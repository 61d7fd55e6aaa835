#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hubopt::cli
{

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitUsage = 64;

/// `hubopt validate | scenarios | compile | solve | report`. `args[0]` is the
/// program name. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hubopt::cli
