#pragma once

// Column-oriented LP/MILP data used by the simplex and branch-and-bound code.

#include "hubopt/milp/instance.hpp"

#include <vector>

namespace hubopt::solver
{

inline constexpr double kInf = milp::kInf;

/// Compressed sparse column matrix; `start` has cols + 1 entries. A row-wise
/// view of A is stored as the CSC form of A'.
struct SparseMatrix
{
    int rows = 0;
    int cols = 0;
    std::vector<int> start;
    std::vector<int> index;
    std::vector<double> value;

    int nnz() const { return static_cast<int>(index.size()); }
    /// CSC form of the transpose.
    SparseMatrix transposed() const;
};

/// min c'x + offset  s.t.  row_lower <= A x <= row_upper,  col_lower <= x <= col_upper.
struct LpProblem
{
    SparseMatrix a; // CSC: major index = column
    std::vector<double> cost;
    std::vector<double> col_lower;
    std::vector<double> col_upper;
    std::vector<double> row_lower;
    std::vector<double> row_upper;
    std::vector<char> integer;
    double offset = 0.0;

    int rows() const { return a.rows; }
    int cols() const { return a.cols; }
};

LpProblem to_lp(const milp::MILPInstance& instance);

/// Builds CSC from (row, col, value) triplets; duplicates are summed.
SparseMatrix csc_from_triplets(int rows, int cols, std::vector<int> ri, std::vector<int> ci,
                               std::vector<double> v);

double objective_of(const LpProblem& lp, const std::vector<double>& x);
/// Largest bound or row violation of `x`.
double max_violation(const LpProblem& lp, const std::vector<double>& x);

} // namespace hubopt::solver
