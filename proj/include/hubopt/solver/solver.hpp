#pragma once

#include "hubopt/milp/instance.hpp"
#include "hubopt/solver/solution.hpp"

namespace hubopt::solver
{

/// Solves the LP relaxation (integrality ignored).
Solution solve_lp(const milp::MILPInstance& instance, const SolverConfig& config = {});

/// Best-first branch-and-bound; identical to solve_lp when no variable is integer.
Solution solve_milp(const milp::MILPInstance& instance, const SolverConfig& config = {});

/// Throws Error{AuditFailure} if `solution` violates the instance beyond the config tolerances.
void require_feasible(const milp::MILPInstance& instance, const Solution& solution, const SolverConfig& config);

} // namespace hubopt::solver
