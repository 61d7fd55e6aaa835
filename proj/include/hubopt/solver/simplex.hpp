#pragma once

// Bounded revised simplex on [A -I] with one logical per row. The dual method
// does the main work (cold starts and warm starts after bound changes); a
// primal phase 2 removes dual infeasibilities left by perturbation or shifts.

#include "hubopt/solver/factor.hpp"
#include "hubopt/solver/kernels.hpp"
#include "hubopt/solver/lp.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

namespace hubopt::solver
{

struct SimplexOptions
{
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_interval = 100;
    std::int64_t iteration_limit = 5'000'000;
    bool perturb = true;
    /// Bound substituted for an infinite one when a column starts dual infeasible.
    double artificial_bound = 1e7;
};

enum class LpStatus
{
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
    /// Dual objective passed the cutoff; the LP optimum is at least that large.
    Cutoff,
};

struct Basis
{
    /// One entry per structural then per logical (kernels::NonbasicState).
    std::vector<std::int8_t> status;
    bool empty() const { return status.empty(); }
};

class Simplex
{
public:
    using Clock = std::chrono::steady_clock;

    Simplex(const LpProblem& lp, SimplexOptions options = {});

    void set_bounds(int j, double lower, double upper);
    double lower(int j) const { return real_lb_[static_cast<std::size_t>(j)]; }
    double upper(int j) const { return real_ub_[static_cast<std::size_t>(j)]; }

    void set_basis(const Basis& basis);
    Basis basis() const;
    void set_perturb(bool on) { opt_.perturb = on; }

    /// Runs from the current basis. `cutoff` stops early once the dual bound exceeds it.
    LpStatus solve(std::optional<Clock::time_point> deadline = std::nullopt,
                   double cutoff = kInf);

    /// Structural values.
    std::vector<double> primal() const;
    double objective() const;
    std::int64_t iterations() const { return iterations_; }
    int rows() const { return m_; }
    int cols() const { return n_; }

private:
    enum class Phase
    {
        Done,
        Infeasible,
        Unbounded,
        Limit,
        Cutoff,
    };

    SparseColumn column(int j) const;
    void slack_basis();
    void place_nonbasic(int j);
    void refactor();
    void compute_primal();
    void compute_duals();
    bool make_dual_feasible();
    void perturb_costs();
    void remove_artificial(int j);
    bool limits_hit();

    enum class Step
    {
        Moved,
        Pivoted,
        Degenerate,
        Unbounded,
        Trouble,
    };

    Phase dual_loop(double cutoff);
    /// One primal iteration with entering column q moving in direction dir;
    /// `range` is how far q may move before it lands on `end_value`.
    Step primal_step(int q, double dir, double range, std::int8_t end_state, double end_value);
    /// Moves a column parked on an artificial bound back to its real bound (or 0 if free).
    bool release_artificial(int j);
    Phase primal_loop();
    void pivot_row(const std::vector<double>& rho);
    void clear_pivot_row();
    double primal_infeasibility(int k) const;
    void apply_flips(const std::vector<int>& flips);
    double current_objective(const std::vector<double>& costs) const;
    /// Lower bound from the current duals and the original costs.
    double lagrangian_bound();

    const LpProblem& lp_;
    SimplexOptions opt_;
    SparseMatrix at_;
    int n_ = 0;
    int m_ = 0;

    std::vector<double> lb_, ub_, real_lb_, real_ub_;
    std::vector<char> artificial_;
    std::vector<double> cost_, wcost_;
    std::vector<double> x_, d_;
    std::vector<std::int8_t> state_;
    std::vector<std::int8_t> is_basic_;
    std::vector<int> head_;
    std::vector<double> weight_;

    BasisFactor factor_;
    bool factor_valid_ = false;
    bool perturbed_ = false;
    std::vector<int> logical_index_;
    double minus_one_ = -1.0;

    std::vector<double> alpha_;
    std::vector<int> alpha_nz_;
    std::vector<double> col_buf_, rho_buf_;
    std::vector<char> alpha_mark_;
    bool alpha_dense_ = false;

    std::int64_t iterations_ = 0;
    std::optional<Clock::time_point> deadline_;
    bool time_out_ = false;
};

} // namespace hubopt::solver
