#include "hub_fixture.hpp"

#include "hubopt/solver/solver.hpp"

#include <doctest.h>

#include <fmt/core.h>

#include <random>

using namespace hubopt;
using milp::Direction;
using milp::VarKind;

namespace
{

struct HubSpec
{
    std::vector<double> price;
    int electrolyzers = 0;
    double elz_cost = 0.0;
    int tanks = 0;
    double tank_cost = 0.0;
    double sale = 0.0;
};

// Electrolyzer stacks feeding a sale node directly and through a cyclic tank.
std::string hub_rows(const HubSpec& s)
{
    return fmt::format("node,El,nodal_balance_sense,Base,,<=\n"
                       "node,H2,nodal_balance_sense,Base,,==\n"
                       "node,Out,nodal_balance_sense,Base,,>=\n"
                       "node,T,has_state,Base,,true\n"
                       "node,T,cyclic_condition,Base,,true\n"
                       "node,T,node_state_cap,Base,,0.5\n"
                       "node,T,frac_state_loss,Base,,0.01\n"
                       "node,T,candidate_storages,Base,,{}\n"
                       "node,T,storage_investment_cost,Base,,{}\n"
                       "node,T,storage_investment_variable_type,Base,,variable_type_integer\n"
                       "unit,elz,,,,\n"
                       "unit,elz,number_of_units,Base,,0\n"
                       "unit,elz,candidate_units,Base,,{}\n"
                       "unit,elz,unit_investment_cost,Base,,{}\n"
                       "unit,elz,unit_investment_variable_type,Base,,unit_investment_variable_type_integer\n"
                       "unit,elz,online_variable_type,Base,,unit_online_variable_type_integer\n"
                       "unit,elz,min_down_time,Base,,2h\n"
                       "unit__to_node,elz|H2,unit_capacity,Base,,0.1\n"
                       "unit__to_node,elz|H2,minimum_operating_point,Base,,0.2\n"
                       "unit__from_node,elz|El,fuel_cost,Base,,ts:price.csv\n"
                       "unit__node__node,elz|El|H2,fix_ratio_in_out_unit_flow,Base,,53.6\n"
                       "unit,sell,,,,\n"
                       "unit__to_node,sell|Out,fuel_cost,Base,,{}\n"
                       "unit__node__node,sell|H2|Out,fix_ratio_in_out_unit_flow,Base,,1\n"
                       "unit,charge,,,,\n"
                       "unit__node__node,charge|H2|T,fix_ratio_in_out_unit_flow,Base,,1\n"
                       "unit,discharge,,,,\n"
                       "unit__node__node,discharge|T|Out,fix_ratio_in_out_unit_flow,Base,,1\n"
                       "unit__to_node,discharge|Out,fuel_cost,Base,,{}\n",
                       s.tanks, s.tank_cost, s.electrolyzers, s.elz_cost, s.sale, s.sale);
}

HubSpec random_spec(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> price(5.0, 80.0), cost(1e5, 4e6), sale(-3000.0, -1500.0);
    std::uniform_int_distribution<int> count(0, 3);
    HubSpec s;
    for (int h = 0; h < 6; ++h)
        s.price.push_back(std::round(price(rng)));
    s.electrolyzers = count(rng);
    s.elz_cost = std::round(cost(rng));
    s.tanks = count(rng);
    s.tank_cost = std::round(cost(rng) / 10);
    s.sale = std::round(sale(rng));
    return s;
}

fixture::Hub build(const HubSpec& s, const std::string& name, milp::Mode mode = milp::Mode::Milp)
{
    return fixture::build(name, hub_rows(s), {"Base"}, static_cast<int>(s.price.size()), {{"price.csv", s.price}},
                          mode);
}

} // namespace

TEST_CASE("more candidate units never raise the optimum")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 12; ++trial)
    {
        auto spec = random_spec(rng);
        auto base = solver::solve_milp(build(spec, "mono_a").instance);
        spec.electrolyzers += 1 + trial % 2;
        spec.tanks += trial % 3;
        auto more = solver::solve_milp(build(spec, "mono_b").instance);
        CAPTURE(trial);
        REQUIRE(base.status == solver::Status::Optimal);
        REQUIRE(more.status == solver::Status::Optimal);
        CHECK(more.objective <= base.objective + 1e-6 * std::max(1.0, std::abs(base.objective)));
        // Doing nothing is always feasible here, so no optimum is positive.
        CHECK(base.objective <= 1e-9);
    }
}

TEST_CASE("the LP relaxation bounds the MILP optimum")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 12; ++trial)
    {
        auto spec = random_spec(rng);
        auto milp_sol = solver::solve_milp(build(spec, "sandwich_milp").instance);
        auto lp_sol = solver::solve_lp(build(spec, "sandwich_lp", milp::Mode::Lp).instance);
        CAPTURE(trial);
        REQUIRE(milp_sol.status == solver::Status::Optimal);
        REQUIRE(lp_sol.status == solver::Status::Optimal);
        CHECK(lp_sol.objective <= milp_sol.objective + 1e-6 * std::max(1.0, std::abs(milp_sol.objective)));
        CHECK(milp_sol.best_bound <= milp_sol.objective);
    }
}

TEST_CASE("scaling the objective scales the optimum and keeps the argmin")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 8; ++trial)
    {
        auto spec = random_spec(rng);
        spec.electrolyzers = std::max(spec.electrolyzers, 1);
        auto hub = build(spec, "scale");
        auto sol = solver::solve_milp(hub.instance);
        REQUIRE(sol.status == solver::Status::Optimal);
        for (double k : {0.01, 3.0, 250.0})
        {
            auto scaled = hub.instance;
            for (auto& t : scaled.objective)
                t.coeff *= k;
            scaled.objective_offset *= k;
            auto again = solver::solve_milp(scaled);
            CAPTURE(trial);
            CAPTURE(k);
            REQUIRE(again.status == solver::Status::Optimal);
            double tol = 1e-6 * std::max(1.0, std::abs(k * sol.objective));
            CHECK(again.objective == doctest::Approx(k * sol.objective).epsilon(1e-6).scale(tol));
            // The original argmin stays feasible and optimal under the scaled objective.
            CHECK(milp::audit(scaled, sol.values).ok);
            CHECK(milp::evaluate_objective(scaled, sol.values) == doctest::Approx(again.objective).scale(tol));
        }
    }
}

TEST_CASE("binary size family picks the one profitable size")
{
    // Sizes 2..10 t/h, one candidate each, same investment cost. Over 3 hours
    // at a margin of 100 per t only size 10 earns back its prorated cost.
    const int hours = 3;
    const double margin = 100.0;
    const double horizon_cost = 2500.0;
    const double annual_cost = horizon_cost * 8736.0 / hours;
    std::string rows = "node,Src,nodal_balance_sense,Base,,<=\n"
                       "node,Out,nodal_balance_sense,Base,,>=\n"
                       "user_constraint,one_size,constraint_sense,Base,,<=\n";
    rows += fmt::format("user_constraint,one_size,right_hand_side,Base,,{}\n", hours);
    std::vector<int> sizes{2, 4, 6, 8, 10};
    for (int size : sizes)
    {
        auto u = fmt::format("syn_{:02}", size);
        rows += fmt::format("unit,{0},,,,\n"
                            "unit,{0},candidate_units,Base,,1\n"
                            "unit,{0},number_of_units,Base,,0\n"
                            "unit,{0},unit_investment_cost,Base,,{1}\n"
                            "unit,{0},unit_investment_variable_type,Base,,unit_investment_variable_type_integer\n"
                            "unit,{0},online_variable_type,Base,,unit_online_variable_type_integer\n"
                            "unit__to_node,{0}|Out,unit_capacity,Base,,{2}\n"
                            "unit__to_node,{0}|Out,fuel_cost,Base,,{3}\n"
                            "unit__node__node,{0}|Src|Out,fix_ratio_in_out_unit_flow,Base,,1\n"
                            "user_constraint__unit,one_size|{0},units_on_coefficient,Base,,1\n",
                            u, annual_cost, size, -margin);
    }
    auto hub = fixture::build("sizes", rows, {"Base"}, hours);
    auto sol = solver::solve_milp(hub.instance);
    REQUIRE(sol.status == solver::Status::Optimal);

    double best = 0.0;
    int best_size = 0;
    for (int size : sizes)
        if (double value = size * margin * hours - horizon_cost; value > best)
            best = value, best_size = size;
    CHECK(best_size == 10);
    CHECK(sol.objective == doctest::Approx(-best).epsilon(1e-9));
    for (int size : sizes)
    {
        int inv = hub.instance.at(
            {VarKind::UnitsInvestedAvailable, fmt::format("syn_{:02}", size), {}, Direction::None, 0});
        CHECK(sol.values[static_cast<std::size_t>(inv)] == doctest::Approx(size == best_size ? 1.0 : 0.0));
    }
}

TEST_CASE("all-continuous instances solve identically with and without branching")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 6; ++trial)
    {
        auto hub = build(random_spec(rng), "continuous", milp::Mode::Lp);
        REQUIRE(hub.instance.integer_count() == 0);
        auto a = solver::solve_lp(hub.instance);
        auto b = solver::solve_milp(hub.instance);
        CHECK(a.status == b.status);
        CHECK(a.objective == b.objective);
        CHECK(a.values == b.values);
    }
}
