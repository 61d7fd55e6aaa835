#include "hubopt/error.hpp"
#include "hubopt/solver/presolve.hpp"
#include "hubopt/solver/simplex.hpp"
#include "hubopt/solver/solver.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>

namespace hubopt::solver
{

std::string_view to_string(Status status)
{
    switch (status)
    {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::GapLimit: return "GapLimit";
    case Status::IterationLimit: return "IterationLimit";
    }
    return "?";
}

std::optional<Status> parse_status(std::string_view text)
{
    for (Status s : {Status::Optimal, Status::Infeasible, Status::Unbounded, Status::GapLimit, Status::IterationLimit})
        if (to_string(s) == text)
            return s;
    return std::nullopt;
}

double relative_gap(double incumbent, double bound)
{
    if (!std::isfinite(incumbent))
        return kInf;
    if (bound >= incumbent)
        return 0.0;
    return (incumbent - bound) / std::max(std::abs(incumbent), 1e-10);
}

namespace
{

using Clock = std::chrono::steady_clock;

struct BoundChange
{
    int col;
    double lower;
    double upper;
};

struct Node
{
    double bound;
    std::int64_t id;
    std::vector<BoundChange> changes;
    std::shared_ptr<const Basis> basis;
};

struct WorseNode
{
    bool operator()(const Node& a, const Node& b) const
    {
        return a.bound != b.bound ? a.bound > b.bound : a.id > b.id;
    }
};

struct Incumbent
{
    double objective = kInf;
    std::vector<double> x;
    Basis basis;
};

struct Outcome
{
    Status status = Status::IterationLimit;
    std::vector<double> x;
    double best_bound = -kInf;
    std::int64_t iterations = 0;
    std::int64_t nodes = 0;
};

SimplexOptions simplex_options(const SolverConfig& cfg)
{
    SimplexOptions o;
    o.pivot_tol = cfg.pivot_tol;
    o.iteration_limit = cfg.iteration_limit;
    return o;
}

class Engine
{
public:
    Engine(const LpProblem& reduced, const SolverConfig& cfg)
        : lp_(reduced), cfg_(cfg),
          scaling_(cfg.scaling ? compute_scaling(reduced) : identity_scaling(reduced)),
          scaled_(scaling_.apply(reduced)), spx_(scaled_, simplex_options(cfg))
    {
        for (int j = 0; j < reduced.cols(); ++j)
            if (reduced.integer[static_cast<std::size_t>(j)])
                ints_.push_back(j);
        costly_.assign(static_cast<std::size_t>(reduced.cols()), 0);
        for (int j : ints_)
            costly_[static_cast<std::size_t>(j)] = reduced.cost[static_cast<std::size_t>(j)] != 0.0 ? 1 : 0;
        if (cfg.time_limit > 0.0)
            deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(cfg.time_limit));
    }

    Outcome run()
    {
        Outcome out;
        LpStatus st = solve_node({}, nullptr);
        if (st != LpStatus::Optimal)
        {
            out.status = st == LpStatus::Infeasible  ? Status::Infeasible
                         : st == LpStatus::Unbounded ? Status::Unbounded
                                                     : Status::IterationLimit;
            out.iterations = spx_.iterations();
            return out;
        }
        double root_obj = spx_.objective();
        // Warm starts after a bound change are close to optimal; perturbing
        // them mostly adds primal cleanup work.
        spx_.set_perturb(false);
        std::vector<double> x = values();
        log("root LP {:.10g} ({} rows, {} cols, {} integer, {} iterations)", root_obj, lp_.rows(), lp_.cols(),
            ints_.size(), spx_.iterations());

        std::priority_queue<Node, std::vector<Node>, WorseNode> queue;
        double pruned_bound = kInf;
        std::int64_t next_id = 1;
        bool limit = false;

        auto expand = [&](const Node& node, double obj, const std::vector<double>& xv) {
            int j = most_fractional(xv);
            if (j < 0)
            {
                offer(obj, xv);
                return;
            }
            auto [lo, up] = bounds_of(node.changes, j);
            double fl = std::floor(xv[static_cast<std::size_t>(j)]);
            auto basis = std::make_shared<const Basis>(spx_.basis());
            Node left{obj, next_id++, node.changes, basis};
            left.changes.push_back({j, lo, fl});
            Node right{obj, next_id++, node.changes, basis};
            right.changes.push_back({j, fl + 1.0, up});
            queue.push(std::move(left));
            queue.push(std::move(right));
        };

        Node root{root_obj, 0, {}, nullptr};
        expand(root, root_obj, x);
        if (!queue.empty())
        {
            auto root_basis = spx_.basis();
            dive({}, x, false);
            spx_.set_basis(root_basis);
            dive({}, x, true);
            log("root dives done, incumbent {:.10g}, {} iterations", inc_.objective, spx_.iterations());
        }

        while (!queue.empty())
        {
            if (nodes_ >= cfg_.node_limit || timed_out())
            {
                limit = true;
                break;
            }
            Node node = queue.top();
            queue.pop();
            if (prunable(node.bound))
            {
                pruned_bound = std::min(pruned_bound, node.bound);
                continue;
            }
            st = solve_node(node.changes, node.basis.get());
            ++nodes_;
            if (st == LpStatus::TimeLimit || st == LpStatus::IterationLimit)
            {
                queue.push(std::move(node));
                limit = true;
                break;
            }
            if (st != LpStatus::Optimal)
                continue;
            double obj = spx_.objective();
            if (prunable(obj))
            {
                pruned_bound = std::min(pruned_bound, obj);
                continue;
            }
            x = values();
            expand(node, obj, x);
            if (nodes_ % kDiveInterval == 0 && most_fractional(x) >= 0)
                dive(node.changes, x, false);
            if (cfg_.verbose && nodes_ % 20 == 0)
                log("nodes {} open {} incumbent {:.10g} bound {:.10g}", nodes_, queue.size(), inc_.objective,
                    std::min(queue.empty() ? kInf : queue.top().bound, pruned_bound));
        }

        double bound = std::min(pruned_bound, inc_.objective);
        if (!queue.empty())
            bound = std::min(bound, queue.top().bound);
        out.iterations = spx_.iterations();
        out.nodes = nodes_;
        if (!std::isfinite(inc_.objective))
        {
            out.status = limit ? Status::IterationLimit : Status::Infeasible;
            out.best_bound = limit ? std::min(bound, root_obj) : kInf;
            return out;
        }
        out.best_bound = std::max(bound, root_obj);
        out.best_bound = std::min(out.best_bound, inc_.objective);
        bool closed = relative_gap(inc_.objective, out.best_bound) <= cfg_.relative_gap;
        out.status = (!limit || closed) ? Status::Optimal : Status::GapLimit;
        out.x = polish();
        log("done: {} nodes, incumbent {:.10g}, bound {:.10g}", nodes_, inc_.objective, out.best_bound);
        return out;
    }

private:
    static constexpr std::int64_t kDiveInterval = 200;

    template <typename... Args>
    void log(fmt::format_string<Args...> f, Args&&... args) const
    {
        if (cfg_.verbose)
            fmt::print(stderr, "[bnb {:7.2f}s] {}\n", std::chrono::duration<double>(Clock::now() - start_).count(),
                       fmt::format(f, std::forward<Args>(args)...));
    }

    bool timed_out() const { return deadline_ && Clock::now() > *deadline_; }

    double cutoff() const { return inc_.objective; }

    bool prunable(double bound) const
    {
        return std::isfinite(inc_.objective) && relative_gap(inc_.objective, bound) <= cfg_.relative_gap;
    }

    LpStatus solve_node(const std::vector<BoundChange>& changes, const Basis* basis)
    {
        for (int j : ints_)
            spx_.set_bounds(j, lp_.col_lower[static_cast<std::size_t>(j)], lp_.col_upper[static_cast<std::size_t>(j)]);
        for (const auto& c : changes)
            spx_.set_bounds(c.col, c.lower, c.upper);
        if (basis)
            spx_.set_basis(*basis);
        try
        {
            return spx_.solve(deadline_, cutoff());
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::NumericalBreakdown)
                throw;
            // Cold restart from the slack basis.
            spx_.set_basis(Basis{});
            return spx_.solve(deadline_, cutoff());
        }
    }

    std::vector<double> values() const
    {
        auto x = spx_.primal();
        for (int j = 0; j < lp_.cols(); ++j)
            x[static_cast<std::size_t>(j)] = scaling_.unscale_col(j, x[static_cast<std::size_t>(j)]);
        return x;
    }

    std::pair<double, double> bounds_of(const std::vector<BoundChange>& changes, int j) const
    {
        for (auto it = changes.rbegin(); it != changes.rend(); ++it)
            if (it->col == j)
                return {it->lower, it->upper};
        return {lp_.col_lower[static_cast<std::size_t>(j)], lp_.col_upper[static_cast<std::size_t>(j)]};
    }

    double fractionality(double v) const
    {
        double f = v - std::floor(v);
        double d = std::min(f, 1.0 - f);
        return d > cfg_.integrality_tol ? d : 0.0;
    }

    // Most fractional integer column; ties go to the lowest index.
    int most_fractional(const std::vector<double>& x) const
    {
        int best = -1;
        double score = 0.0;
        for (int j : ints_)
        {
            double d = fractionality(x[static_cast<std::size_t>(j)]);
            if (d > score)
            {
                score = d;
                best = j;
            }
        }
        return best;
    }

    void offer(double obj, const std::vector<double>& x)
    {
        if (obj >= inc_.objective)
            return;
        inc_.objective = obj;
        inc_.x = x;
        inc_.basis = spx_.basis();
        log("incumbent {:.10g} after {} nodes", obj, nodes_);
    }

    // Rounds batches of nearly integral columns toward their nearest integer and
    // re-solves, halving the batch on infeasibility. With `costly_up`, columns
    // that carry an objective coefficient (investment-like decisions) are
    // rounded up first.
    void dive(std::vector<BoundChange> changes, std::vector<double> x, bool costly_up)
    {
        for (int round = 0; round < 400; ++round)
        {
            if (timed_out())
                return;
            std::vector<std::tuple<int, double, int>> frac;
            for (int j : ints_)
            {
                double d = fractionality(x[static_cast<std::size_t>(j)]);
                if (d > 0.0)
                    frac.emplace_back(costly_[static_cast<std::size_t>(j)] && costly_up ? 0 : 1, d, j);
            }
            if (frac.empty())
            {
                offer(spx_.objective(), x);
                return;
            }
            std::sort(frac.begin(), frac.end());
            std::size_t costly = static_cast<std::size_t>(
                std::count_if(frac.begin(), frac.end(), [](const auto& f) { return std::get<0>(f) == 0; }));
            std::size_t pool = costly > 0 ? costly : frac.size();
            std::size_t k = std::max<std::size_t>(1, pool / 4);
            bool up = costly > 0 && costly_up;
            bool progressed = false;
            while (!progressed)
            {
                std::size_t base = changes.size();
                for (std::size_t t = 0; t < k; ++t)
                    changes.push_back(round_column(changes, std::get<2>(frac[t]), x, up, false));
                LpStatus st = solve_node(changes, nullptr);
                if (st == LpStatus::Optimal)
                {
                    progressed = true;
                    break;
                }
                changes.resize(base);
                if (st == LpStatus::TimeLimit || st == LpStatus::IterationLimit)
                    return;
                if (k > 1)
                {
                    k /= 2;
                    continue;
                }
                changes.push_back(round_column(changes, std::get<2>(frac[0]), x, up, true));
                st = solve_node(changes, nullptr);
                if (st != LpStatus::Optimal)
                    return;
                progressed = true;
            }
            x = values();
        }
    }

    // Nearest (or up) rounding of column j; `opposite` takes the other side.
    BoundChange round_column(const std::vector<BoundChange>& changes, int j, const std::vector<double>& x, bool up,
                             bool opposite) const
    {
        auto [lo, hi] = bounds_of(changes, j);
        double v = x[static_cast<std::size_t>(j)];
        double fl = std::floor(v);
        bool down = (up ? false : v - fl < 0.5) != opposite;
        return down ? BoundChange{j, lo, fl} : BoundChange{j, fl + 1.0, hi};
    }

    // Re-solves the unscaled problem with integers fixed, starting from the
    // incumbent basis, so reported values carry no scaling round-off.
    std::vector<double> polish() const
    {
        LpProblem fixed = lp_;
        for (int j : ints_)
        {
            double v = std::round(inc_.x[static_cast<std::size_t>(j)]);
            fixed.col_lower[static_cast<std::size_t>(j)] = v;
            fixed.col_upper[static_cast<std::size_t>(j)] = v;
        }
        SimplexOptions opt = simplex_options(cfg_);
        opt.perturb = false;
        Simplex s(fixed, opt);
        s.set_basis(inc_.basis);
        try
        {
            if (s.solve(std::nullopt) == LpStatus::Optimal && s.objective() <= inc_.objective + 1e-9 * (1.0 + std::abs(inc_.objective)))
            {
                auto x = s.primal();
                for (int j : ints_)
                    x[static_cast<std::size_t>(j)] = fixed.col_lower[static_cast<std::size_t>(j)];
                return x;
            }
        }
        catch (const Error&)
        {
        }
        auto x = inc_.x;
        for (int j : ints_)
            x[static_cast<std::size_t>(j)] = std::round(x[static_cast<std::size_t>(j)]);
        return x;
    }

    const LpProblem& lp_;
    const SolverConfig& cfg_;
    Scaling scaling_;
    LpProblem scaled_;
    Simplex spx_;
    std::vector<int> ints_;
    std::vector<char> costly_;
    Clock::time_point start_ = Clock::now();
    std::optional<Clock::time_point> deadline_;
    Incumbent inc_;
    std::int64_t nodes_ = 0;
};

Solution run(const milp::MILPInstance& instance, const SolverConfig& config, bool relax)
{
    Solution sol;
    auto n = instance.variables.size();
    sol.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    LpProblem lp = to_lp(instance);
    if (relax)
        std::fill(lp.integer.begin(), lp.integer.end(), 0);
    Presolved pre = config.presolve ? presolve(lp) : no_presolve(lp);
    if (pre.outcome == Presolved::Outcome::Infeasible)
    {
        sol.status = Status::Infeasible;
        return sol;
    }
    if (pre.outcome == Presolved::Outcome::Unbounded)
    {
        sol.status = Status::Unbounded;
        return sol;
    }

    Outcome out;
    if (pre.reduced.cols() == 0)
    {
        bool ok = true;
        for (int i = 0; i < pre.reduced.rows(); ++i)
            ok = ok && pre.reduced.row_lower[static_cast<std::size_t>(i)] <= config.feasibility_tol &&
                 pre.reduced.row_upper[static_cast<std::size_t>(i)] >= -config.feasibility_tol;
        out.status = ok ? Status::Optimal : Status::Infeasible;
    }
    else
    {
        Engine engine(pre.reduced, config);
        out = engine.run();
    }
    sol.status = out.status;
    sol.iterations = out.iterations;
    sol.nodes = out.nodes;
    if (!sol.has_values())
    {
        sol.best_bound = out.best_bound;
        return sol;
    }
    sol.values = pre.postsolve(out.x);
    if (!relax)
        for (std::size_t j = 0; j < n; ++j)
            if (instance.variables[j].is_integer())
                sol.values[j] = std::round(sol.values[j]);
    sol.objective = milp::evaluate_objective(instance, sol.values);
    sol.best_bound = pre.reduced.cols() == 0 ? sol.objective : std::min(out.best_bound, sol.objective);
    sol.gap = relative_gap(sol.objective, sol.best_bound);
    if (config.audit)
    {
        SolverConfig c = config;
        if (relax)
            c.integrality_tol = kInf;
        require_feasible(instance, sol, c);
    }
    return sol;
}

} // namespace

void require_feasible(const milp::MILPInstance& instance, const Solution& solution, const SolverConfig& config)
{
    auto report = milp::audit(instance, solution.values, config.feasibility_tol, config.integrality_tol);
    if (!report.ok)
        throw Error(ErrorCode::AuditFailure,
                    fmt::format("{} violation(s); worst {} by {:.3g}", report.violations, report.worst, report.max_residual));
}

Solution solve_lp(const milp::MILPInstance& instance, const SolverConfig& config)
{
    return run(instance, config, true);
}

Solution solve_milp(const milp::MILPInstance& instance, const SolverConfig& config)
{
    return run(instance, config, false);
}

} // namespace hubopt::solver
