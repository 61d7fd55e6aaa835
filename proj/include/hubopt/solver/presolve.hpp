#pragma once

// Reductions that keep postsolve trivial: removed columns get a fixed value,
// removed rows are implied by the remaining bounds.

#include "hubopt/solver/lp.hpp"

#include <vector>

namespace hubopt::solver
{

struct Presolved
{
    enum class Outcome
    {
        Reduced,
        Infeasible,
        Unbounded,
    };

    Outcome outcome = Outcome::Reduced;
    LpProblem reduced;
    /// Original index of each reduced column / row.
    std::vector<int> col_map;
    std::vector<int> row_map;
    /// Value of every original column removed by presolve (NaN for kept ones).
    std::vector<double> removed_value;

    std::vector<double> postsolve(const std::vector<double>& reduced_x) const;
};

/// Row singletons to bounds, fixed and empty columns, empty rows.
Presolved presolve(const LpProblem& lp, double tol = 1e-9);

/// Identity mapping; used when presolve is switched off.
Presolved no_presolve(const LpProblem& lp);

/// Power-of-two geometric scaling. Integer columns keep scale 1.
struct Scaling
{
    std::vector<double> col;
    std::vector<double> row;

    LpProblem apply(const LpProblem& lp) const;
    /// Scaled column value -> original value.
    double unscale_col(int j, double v) const { return v * col[static_cast<std::size_t>(j)]; }
    /// Original column bound -> scaled bound.
    double scale_bound(int j, double v) const { return v / col[static_cast<std::size_t>(j)]; }
};

Scaling compute_scaling(const LpProblem& lp, int passes = 6);
Scaling identity_scaling(const LpProblem& lp);

} // namespace hubopt::solver
