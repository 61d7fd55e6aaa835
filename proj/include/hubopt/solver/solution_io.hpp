#pragma once

// Plain-text solution files: `name value` lines, `#` comments ignored.
// Files written here start with `# status`, `# objective`, `# best_bound` and
// `# gap` comment headers; readers fall back to GapLimit when they are absent.

#include "hubopt/milp/instance.hpp"
#include "hubopt/solver/mps.hpp"
#include "hubopt/solver/solution.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace hubopt::solver
{

/// Full variable names, one line per variable with a defined value.
void write_solution(const milp::MILPInstance& instance, const Solution& solution, std::ostream& out);
/// Throws Error{IoFailure}.
void write_solution(const milp::MILPInstance& instance, const Solution& solution, const std::filesystem::path& path);

/// Accepts full variable names, and MPS column names when `tags` is given.
/// Variables absent from the file stay NaN. The objective is recomputed from
/// the values when all of them are present.
/// Throws Error{UnknownVariable | MalformedLine | IoFailure}.
Solution read_solution(const std::filesystem::path& path, const milp::MILPInstance& instance,
                       const TagMap* tags = nullptr);
Solution parse_solution(std::istream& in, const milp::MILPInstance& instance, const TagMap* tags = nullptr);

/// Writes `model.mps`, `model.tags` into `workdir`, runs `command_template`
/// with `{mps}` and `{sol}` replaced by quoted paths, reads `model.sol` and
/// audits it at `config.feasibility_tol`.
/// Throws Error{InvalidArgument | SubprocessFailure | AuditFailure}.
Solution external_solve(const milp::MILPInstance& instance, const std::string& command_template,
                        const SolverConfig& config, const std::filesystem::path& workdir);

} // namespace hubopt::solver
