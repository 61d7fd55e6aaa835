#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hubopt::solver
{

enum class Status
{
    Optimal,
    Infeasible,
    Unbounded,
    GapLimit,
    IterationLimit,
};

std::string_view to_string(Status status);
std::optional<Status> parse_status(std::string_view text);

struct Solution
{
    Status status = Status::IterationLimit;
    /// One value per instance variable; NaN where undefined.
    std::vector<double> values;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double best_bound = -std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    std::int64_t iterations = 0;
    std::int64_t nodes = 0;

    bool has_values() const { return status == Status::Optimal || status == Status::GapLimit; }
};

struct SolverConfig
{
    double feasibility_tol = 1e-6;
    double integrality_tol = 1e-6;
    double relative_gap = 1e-4;
    double pivot_tol = 1e-9;
    std::int64_t node_limit = 20000;
    /// Seconds; non-positive means no limit. Results under a time limit are not reproducible.
    double time_limit = 0.0;
    std::int64_t iteration_limit = 5'000'000;
    bool presolve = true;
    bool scaling = true;
    /// Run every accepted solution through the constraint audit.
    bool audit = true;
    /// Progress lines on stderr.
    bool verbose = false;
};

/// Relative gap (incumbent - bound) / max(|incumbent|, 1e-10); 0 when the bound meets the incumbent.
double relative_gap(double incumbent, double bound);

} // namespace hubopt::solver
