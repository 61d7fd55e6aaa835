#include "hubopt/error.hpp"
#include "hubopt/solver/solver.hpp"
#include "oracles/dense_lp.hpp"

#include <doctest.h>

#include <random>

using namespace hubopt;
using namespace hubopt::solver;

namespace
{

struct Case
{
    milp::MILPInstance instance;
    oracle::DenseLp dense;
};

int add_var(milp::MILPInstance& inst, int t, milp::Domain domain, double lo, double up)
{
    milp::VariableRef ref;
    ref.kind = milp::VarKind::UnitFlow;
    ref.unit = "u";
    ref.node = "n";
    ref.time = t;
    return inst.add_variable(ref, domain, lo, up);
}

void add_row(Case& c, const std::vector<double>& row, milp::Sense sense, double rhs)
{
    milp::LinearConstraint con;
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] != 0.0)
            con.terms.push_back({static_cast<int>(j), row[j]});
    con.sense = sense;
    con.rhs = rhs;
    con.tag = "user:r" + std::to_string(c.instance.constraints.size());
    c.instance.constraints.push_back(con);
    c.dense.rows.push_back(row);
    c.dense.row_lower.push_back(sense == milp::Sense::LE ? -oracle::kInf : rhs);
    c.dense.row_upper.push_back(sense == milp::Sense::GE ? oracle::kInf : rhs);
}

// Up to 12 variables, at most 3 of them integer in {0..4}.
Case random_milp(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> nd(2, 12), md(1, 8), coef(-6, 6), pick(0, 9), small(0, 4);
    Case c;
    int n = nd(rng), m = md(rng);
    int ints = std::min(n, std::uniform_int_distribution<int>(0, 3)(rng));
    for (int j = 0; j < n; ++j)
    {
        bool integer = j < ints;
        double lo = 0.0, up = 4.0;
        if (!integer)
        {
            lo = -static_cast<double>(small(rng));
            up = lo + small(rng) + 0.5 * small(rng);
        }
        add_var(c.instance, j, integer ? milp::Domain::Integer : milp::Domain::Continuous, lo, up);
        c.dense.col_lower.push_back(lo);
        c.dense.col_upper.push_back(up);
        c.dense.integer.push_back(integer ? 1 : 0);
        double cost = coef(rng);
        c.dense.cost.push_back(cost);
        if (cost != 0.0)
            c.instance.objective.push_back({j, cost});
    }
    c.instance.objective_offset = c.dense.offset = 1.5;
    for (int i = 0; i < m; ++i)
    {
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        for (auto& v : row)
            if (pick(rng) < 5)
                v = coef(rng) + (pick(rng) < 3 ? 0.5 : 0.0);
        int k = pick(rng);
        double rhs = coef(rng) + 0.5 * small(rng);
        add_row(c, row, k < 5 ? milp::Sense::LE : k < 9 ? milp::Sense::GE : milp::Sense::EQ, rhs);
    }
    return c;
}

SolverConfig exact_config()
{
    SolverConfig cfg;
    cfg.relative_gap = 1e-9;
    return cfg;
}

} // namespace

TEST_CASE("branch-and-bound matches enumeration on random small MILPs")
{
    std::mt19937_64 rng(2024);
    int optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 400; ++trial)
    {
        auto c = random_milp(rng);
        auto ref = oracle::solve_milp(c.dense);
        CAPTURE(trial);
        for (bool presolve : {true, false})
        {
            auto cfg = exact_config();
            cfg.presolve = presolve;
            cfg.scaling = presolve;
            Solution sol = solve_milp(c.instance, cfg);
            if (ref.outcome == oracle::Outcome::Optimal)
            {
                REQUIRE(sol.status == Status::Optimal);
                CHECK(sol.objective == doctest::Approx(ref.objective).epsilon(1e-7));
                CHECK(sol.best_bound <= sol.objective + 1e-9);
                CHECK(milp::audit(c.instance, sol.values).ok);
            }
            else
                CHECK(sol.status == Status::Infeasible);
        }
        (ref.outcome == oracle::Outcome::Optimal ? optimal : infeasible)++;
    }
    MESSAGE(optimal << " optimal, " << infeasible << " infeasible");
    CHECK(optimal > 100);
}

TEST_CASE("relaxation bound never exceeds the integer optimum")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto c = random_milp(rng);
        auto ip = solve_milp(c.instance, exact_config());
        auto lp = solve_lp(c.instance, exact_config());
        CAPTURE(trial);
        if (ip.status == Status::Optimal)
        {
            REQUIRE(lp.status == Status::Optimal);
            CHECK(lp.objective <= ip.objective + 1e-7);
        }
    }
}

TEST_CASE("single variable bound")
{
    milp::MILPInstance inst;
    int x = add_var(inst, 0, milp::Domain::Continuous, 0.0, milp::kInf);
    inst.objective.push_back({x, -1.0});
    inst.constraints.push_back({{{x, 1.0}}, milp::Sense::LE, 5.0, "user:cap"});
    auto sol = solve_milp(inst);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.values[0] == doctest::Approx(5.0));
    CHECK(sol.objective == doctest::Approx(-5.0));
    CHECK(sol.gap == doctest::Approx(0.0));
}

TEST_CASE("contradicting bounds are infeasible")
{
    milp::MILPInstance inst;
    int x = add_var(inst, 0, milp::Domain::Continuous, -milp::kInf, milp::kInf);
    inst.objective.push_back({x, 1.0});
    inst.constraints.push_back({{{x, 1.0}}, milp::Sense::GE, 2.0, "user:lo"});
    inst.constraints.push_back({{{x, 1.0}}, milp::Sense::LE, 1.0, "user:up"});
    for (bool presolve : {true, false})
    {
        SolverConfig cfg;
        cfg.presolve = presolve;
        auto sol = solve_milp(inst, cfg);
        CHECK(sol.status == Status::Infeasible);
        CHECK_FALSE(sol.has_values());
    }
}

TEST_CASE("unbounded objective")
{
    milp::MILPInstance inst;
    int x = add_var(inst, 0, milp::Domain::Continuous, 0.0, milp::kInf);
    int y = add_var(inst, 1, milp::Domain::Integer, 0.0, 3.0);
    inst.objective.push_back({x, -1.0});
    inst.constraints.push_back({{{x, 1.0}, {y, -1.0}}, milp::Sense::GE, 0.0, "user:link"});
    CHECK(solve_milp(inst).status == Status::Unbounded);
}

TEST_CASE("node limit reports a valid bound")
{
    // Knapsack-like problem that needs branching.
    milp::MILPInstance inst;
    std::vector<double> w{7, 11, 13, 17, 19, 23, 29, 31};
    milp::LinearConstraint cap{{}, milp::Sense::LE, 60.5, "user:cap"};
    for (std::size_t j = 0; j < w.size(); ++j)
    {
        int v = add_var(inst, static_cast<int>(j), milp::Domain::Binary, 0.0, 1.0);
        inst.objective.push_back({v, -w[j] - 0.3 * static_cast<double>(j)});
        cap.terms.push_back({v, w[j]});
    }
    inst.constraints.push_back(cap);
    auto full = solve_milp(inst, exact_config());
    REQUIRE(full.status == Status::Optimal);
    auto cfg = exact_config();
    cfg.node_limit = 1;
    auto cut = solve_milp(inst, cfg);
    REQUIRE(cut.has_values());
    CHECK(cut.best_bound <= full.objective + 1e-9);
    CHECK(cut.objective >= full.objective - 1e-9);
    CHECK(milp::audit(inst, cut.values).ok);
}

TEST_CASE("status names round-trip")
{
    for (Status s : {Status::Optimal, Status::Infeasible, Status::Unbounded, Status::GapLimit, Status::IterationLimit})
        CHECK(parse_status(to_string(s)) == s);
    CHECK_FALSE(parse_status("Feasible").has_value());
}

TEST_CASE("audit failure is reported")
{
    milp::MILPInstance inst;
    int x = add_var(inst, 0, milp::Domain::Continuous, 0.0, 10.0);
    inst.constraints.push_back({{{x, 1.0}}, milp::Sense::LE, 1.0, "user:cap"});
    Solution bad;
    bad.status = Status::Optimal;
    bad.values = {2.0};
    try
    {
        require_feasible(inst, bad, SolverConfig{});
        FAIL("expected AuditFailure");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::AuditFailure);
    }
}
