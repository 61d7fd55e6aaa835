#include "hub_fixture.hpp"

#include "hubopt/error.hpp"
#include "hubopt/solver/solver.hpp"

#include <doctest.h>

#include <algorithm>

using namespace hubopt;
using milp::Direction;
using milp::VarKind;

TEST_SUITE_BEGIN("eq");

namespace
{

const milp::LinearConstraint& row(const milp::MILPInstance& inst, const std::string& tag)
{
    auto it = std::find_if(inst.constraints.begin(), inst.constraints.end(),
                           [&](const milp::LinearConstraint& c) { return c.tag == tag; });
    if (it == inst.constraints.end())
        throw std::runtime_error("no constraint " + tag);
    return *it;
}

bool has_row(const milp::MILPInstance& inst, const std::string& prefix)
{
    return std::any_of(inst.constraints.begin(), inst.constraints.end(),
                       [&](const milp::LinearConstraint& c) { return c.tag.rfind(prefix, 0) == 0; });
}

double coeff(const milp::LinearConstraint& c, int var)
{
    for (const auto& t : c.terms)
        if (t.var == var)
            return t.coeff;
    return 0.0;
}

double objective_coeff(const milp::MILPInstance& inst, int var)
{
    double sum = 0.0;
    for (const auto& t : inst.objective)
        if (t.var == var)
            sum += t.coeff;
    return sum;
}

int unit_var(const milp::MILPInstance& inst, VarKind kind, const std::string& unit, int t)
{
    return inst.at({kind, unit, {}, Direction::None, t});
}

int flow(const milp::MILPInstance& inst, const std::string& unit, const std::string& node, Direction d, int h)
{
    return inst.at({VarKind::UnitFlow, unit, node, d, h});
}

const std::string kPv = "node,El,nodal_balance_sense,Base,,>=\n"
                        "unit,pv,,,,\n"
                        "unit,pv,candidate_units,Base,,1000\n"
                        "unit,pv,number_of_units,Base,,0\n"
                        "unit,pv,unit_investment_cost,Base,,41259\n"
                        "unit,pv,unit_investment_variable_type,Base,,unit_investment_variable_type_continuous\n"
                        "unit__to_node,pv|El,unit_capacity,Base,,1\n";

} // namespace

TEST_CASE("Eq1 bounds availability by candidates and Eq2 ties it to investment in a single period")
{
    auto hub = fixture::build("eq12", kPv, {"Base"}, 168);
    const auto& inst = hub.instance;
    int avail = unit_var(inst, VarKind::UnitsInvestedAvailable, "pv", 0);
    int invested = unit_var(inst, VarKind::UnitsInvested, "pv", 0);
    int mothballed = unit_var(inst, VarKind::UnitsMothballed, "pv", 0);

    const auto& eq1 = row(inst, "Eq1:pv:t0000");
    CHECK(eq1.sense == milp::Sense::LE);
    CHECK(eq1.rhs == 1000.0);
    REQUIRE(eq1.terms.size() == 1);
    CHECK(coeff(eq1, avail) == 1.0);

    const auto& eq2 = row(inst, "Eq2:pv:t0000");
    CHECK(eq2.sense == milp::Sense::EQ);
    CHECK(eq2.rhs == 0.0);
    CHECK(eq2.terms.size() == 3);
    CHECK(coeff(eq2, avail) == 1.0);
    CHECK(coeff(eq2, invested) == -1.0);
    CHECK(coeff(eq2, mothballed) == 1.0);
    // Mothballing is off by default.
    CHECK(inst.variables[static_cast<std::size_t>(mothballed)].upper == 0.0);

    // One week carries 168/8736 of the annualised investment cost.
    CHECK(objective_coeff(inst, invested) == doctest::Approx(41259.0 * 168.0 / 8736.0).epsilon(1e-12));
}

TEST_CASE("zero candidates force investment availability to zero")
{
    std::string rows = kPv;
    rows.replace(rows.find("candidate_units,Base,,1000"), 26, "candidate_units,Base,,0");
    auto hub = fixture::build("eq1zero", rows, {"Base"}, 3);
    CHECK(row(hub.instance, "Eq1:pv:t0000").rhs == 0.0);
    auto sol = solver::solve_milp(hub.instance);
    REQUIRE(sol.status == solver::Status::Optimal);
    CHECK(sol.values[static_cast<std::size_t>(unit_var(hub.instance, VarKind::UnitsInvestedAvailable, "pv", 0))] ==
          0.0);
}

TEST_CASE("Eq2 carries availability from one investment period to the next")
{
    std::string rows = kPv + "model,M,investment_block,Base,,investment\n"
                             "temporal_block,investment,resolution,Base,,2h\n";
    auto hub = fixture::build("eq2two", rows, {"Base"}, 4);
    const auto& inst = hub.instance;
    REQUIRE(inst.meta.period_weight.size() == 2);
    CHECK(inst.meta.period_of_hour == std::vector<int>{0, 0, 1, 1});

    auto avail = [&](int p) { return unit_var(inst, VarKind::UnitsInvestedAvailable, "pv", p); };
    auto invested = [&](int p) { return unit_var(inst, VarKind::UnitsInvested, "pv", p); };
    auto mothballed = [&](int p) { return unit_var(inst, VarKind::UnitsMothballed, "pv", p); };

    const auto& first = row(inst, "Eq2:pv:t0000");
    const auto& second = row(inst, "Eq2:pv:t0001");
    CHECK(first.terms.size() == 3);
    CHECK(second.terms.size() == 4);
    CHECK(coeff(second, avail(0)) == -1.0);

    // Invest 3 in the first period, mothball 1 in the second.
    std::vector<double> x(inst.variables.size(), 0.0);
    x[static_cast<std::size_t>(invested(0))] = 3;
    x[static_cast<std::size_t>(avail(0))] = 3;
    x[static_cast<std::size_t>(mothballed(1))] = 1;
    x[static_cast<std::size_t>(avail(1))] = 2;
    CHECK(milp::violation(first, x) == 0.0);
    CHECK(milp::violation(second, x) == 0.0);
    x[static_cast<std::size_t>(avail(1))] = 3;
    CHECK(milp::violation(second, x) == doctest::Approx(1.0));
}

TEST_CASE("Eq3 scales existing plus invested units by the availability factor")
{
    auto hub = fixture::build("eq3", kPv + "unit,pv,unit_availability_factor,Base,,ts:cf.csv\n", {"Base"}, 3,
                              {{"cf.csv", {0.5, 0.0, 1.0}}});
    const auto& inst = hub.instance;
    int inv_avail = unit_var(inst, VarKind::UnitsInvestedAvailable, "pv", 0);

    const auto& h0 = row(inst, "Eq3:pv:h0000");
    int avail0 = unit_var(inst, VarKind::UnitsAvailable, "pv", 0);
    CHECK(h0.sense == milp::Sense::LE);
    CHECK(h0.rhs == 0.0);
    CHECK(coeff(h0, avail0) == 1.0);
    CHECK(coeff(h0, inv_avail) == -0.5);
    std::vector<double> x(inst.variables.size(), 0.0);
    x[static_cast<std::size_t>(inv_avail)] = 100;
    x[static_cast<std::size_t>(avail0)] = 50;
    CHECK(milp::violation(h0, x) == 0.0);
    x[static_cast<std::size_t>(avail0)] = 50.5;
    CHECK(milp::violation(h0, x) == doctest::Approx(0.5));

    // Zero availability leaves units_available bounded by zero alone.
    const auto& h1 = row(inst, "Eq3:pv:h0001");
    REQUIRE(h1.terms.size() == 1);
    CHECK(h1.terms[0].var == unit_var(inst, VarKind::UnitsAvailable, "pv", 1));
    CHECK(h1.rhs == 0.0);
}

TEST_CASE("Eq3 counts existing units on the right-hand side")
{
    auto hub = fixture::build("eq3existing", fixture::toy_electrolyzer("unit,elz,unit_availability_factor,Base,,0.8\n"),
                              {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    const auto& r = row(hub.instance, "Eq3:elz:h0002");
    CHECK(r.rhs == doctest::Approx(0.8));
    CHECK(r.terms.size() == 1);
}

TEST_CASE("Eq4 and Eq5 chain units_on between availability and flow")
{
    auto hub = fixture::build(
        "eq45",
        fixture::toy_electrolyzer("unit__to_node,elz|H2,minimum_operating_point,Base,,0.2\n", 110),
        {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    const auto& inst = hub.instance;
    int on = unit_var(inst, VarKind::UnitsOn, "elz", 1);
    int avail = unit_var(inst, VarKind::UnitsAvailable, "elz", 1);
    int h2 = flow(inst, "elz", "H2", Direction::ToNode, 1);

    const auto& eq4 = row(inst, "Eq4:elz:h0001");
    CHECK(eq4.sense == milp::Sense::LE);
    CHECK(coeff(eq4, on) == 1.0);
    CHECK(coeff(eq4, avail) == -1.0);
    CHECK(row(inst, "Eq3:elz:h0001").rhs == 110.0);

    const auto& eq5 = row(inst, "Eq5:elz:to:H2:h0001");
    CHECK(eq5.sense == milp::Sense::LE);
    CHECK(coeff(eq5, h2) == 1.0);
    CHECK(coeff(eq5, on) == -0.0081);
    const auto& minop = row(inst, "minop:elz:to:H2:h0001");
    CHECK(minop.sense == milp::Sense::GE);
    CHECK(coeff(minop, on) == doctest::Approx(-0.00162).epsilon(1e-12));

    std::vector<double> x(inst.variables.size(), 0.0);
    x[static_cast<std::size_t>(on)] = 110;
    x[static_cast<std::size_t>(h2)] = 0.891;
    CHECK(milp::violation(eq5, x) == doctest::Approx(0.0).epsilon(1e-12));
    x[static_cast<std::size_t>(h2)] = 0.892;
    CHECK(milp::violation(eq5, x) == doctest::Approx(0.001));

    // One unit on: at least 20% of one stack.
    x[static_cast<std::size_t>(on)] = 1;
    x[static_cast<std::size_t>(h2)] = 0.00162;
    CHECK(milp::violation(minop, x) == doctest::Approx(0.0).epsilon(1e-12));
    x[static_cast<std::size_t>(h2)] = 0.0016;
    CHECK(milp::violation(minop, x) > 0.0);

    // Nothing on: both bounds collapse to zero.
    x[static_cast<std::size_t>(on)] = 0;
    x[static_cast<std::size_t>(h2)] = 1e-3;
    CHECK(milp::violation(eq5, x) > 0.0);
    x[static_cast<std::size_t>(h2)] = -1e-3;
    CHECK(milp::violation(minop, x) > 0.0);
}

TEST_CASE("fix_units_on pins units_on to the series value")
{
    auto hub = fixture::build("fixon", fixture::toy_electrolyzer("unit,elz,fix_units_on,Base,,ts:on.csv\n"), {"Base"},
                              3, {{"price.csv", {50, 10, 30}}, {"on.csv", {0.62, 0.62, 0.62}}});
    auto sol = solver::solve_milp(hub.instance);
    REQUIRE(sol.status == solver::Status::Optimal);
    for (int h = 0; h < 3; ++h)
    {
        CHECK(row(hub.instance, "fix_on:elz:h000" + std::to_string(h)).rhs == 0.62);
        CHECK(sol.values[static_cast<std::size_t>(unit_var(hub.instance, VarKind::UnitsOn, "elz", h))] ==
              doctest::Approx(0.62).epsilon(1e-9));
    }
}

TEST_CASE("toy hub runs only in hours whose price is below the break-even")
{
    const std::vector<double> price{50, 10, 30};
    auto hub = fixture::build("toy", fixture::toy_electrolyzer(), {"Base"}, 3, {{"price.csv", price}});
    const auto& inst = hub.instance;

    // Per-hour margin: sell 0.0081 t at 2160 against 53.6 MWh per t at the hourly price.
    double expected = 0.0;
    std::vector<double> expected_h2;
    for (double p : price)
    {
        double margin = 53.6 * p - 2160.0;
        expected_h2.push_back(margin < 0 ? 0.0081 : 0.0);
        expected += margin < 0 ? 0.0081 * margin : 0.0;
    }
    CHECK(expected_h2 == std::vector<double>{0.0, 0.0081, 0.0081});
    CHECK(objective_coeff(inst, flow(inst, "elz", "H2", Direction::ToNode, 0)) == -2160.0);

    for (auto solve : {solver::solve_lp, solver::solve_milp})
    {
        auto sol = solve(inst, {});
        REQUIRE(sol.status == solver::Status::Optimal);
        CHECK(sol.objective == doctest::Approx(expected).epsilon(1e-9));
        for (int h = 0; h < 3; ++h)
        {
            double h2 = sol.values[static_cast<std::size_t>(flow(inst, "elz", "H2", Direction::ToNode, h))];
            double el = sol.values[static_cast<std::size_t>(flow(inst, "elz", "El", Direction::FromNode, h))];
            double water = sol.values[static_cast<std::size_t>(flow(inst, "elz", "H2O", Direction::FromNode, h))];
            CHECK(h2 == doctest::Approx(expected_h2[static_cast<std::size_t>(h)]).epsilon(1e-9));
            CHECK(el == doctest::Approx(53.6 * h2).epsilon(1e-9));
            CHECK(water == doctest::Approx(9.9999 * h2).epsilon(1e-9));
        }
    }
}

TEST_CASE("out_out ratios couple co-products to the main output")
{
    auto hub = fixture::build("outout",
                              fixture::toy_electrolyzer("node,Heat,nodal_balance_sense,Base,,>=\n"
                                                        "node,O,nodal_balance_sense,Base,,>=\n"
                                                        "unit__node__node,elz|H2|Heat,fix_ratio_out_out_unit_flow,Base,,9.763\n"
                                                        "unit__node__node,elz|H2|O,fix_ratio_out_out_unit_flow,Base,,4.965\n"),
                              {"Base"}, 3, {{"price.csv", {10, 10, 60}}});
    const auto& inst = hub.instance;
    auto sol = solver::solve_milp(inst);
    REQUIRE(sol.status == solver::Status::Optimal);
    for (int h = 0; h < 3; ++h)
    {
        auto v = [&](const std::string& node, Direction d) {
            return sol.values[static_cast<std::size_t>(flow(inst, "elz", node, d, h))];
        };
        double h2 = v("H2", Direction::ToNode);
        CHECK(h2 == doctest::Approx(h < 2 ? 0.0081 : 0.0).epsilon(1e-9));
        CHECK(v("Heat", Direction::ToNode) == doctest::Approx(9.763 * h2).epsilon(1e-9));
        CHECK(v("O", Direction::ToNode) == doctest::Approx(4.965 * h2).epsilon(1e-9));
    }
}

TEST_CASE("nodal balance senses and isolated nodes")
{
    auto hub = fixture::build("balance", fixture::toy_electrolyzer("node,Lonely,nodal_balance_sense,Base,,==\n"),
                              {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    const auto& inst = hub.instance;
    CHECK(row(inst, "balance:El:h0000").sense == milp::Sense::LE);
    CHECK(row(inst, "balance:H2:h0000").sense == milp::Sense::GE);
    CHECK(coeff(row(inst, "balance:H2:h0000"), flow(inst, "elz", "H2", Direction::ToNode, 0)) == 1.0);
    CHECK(coeff(row(inst, "balance:El:h0000"), flow(inst, "elz", "El", Direction::FromNode, 0)) == -1.0);
    CHECK_FALSE(has_row(inst, "balance:Lonely"));
}

TEST_CASE("storage state carries over with the per-hour loss and closes the cycle")
{
    std::string rows = "node,S,has_state,Base,,true\n"
                       "node,S,frac_state_loss,Base,,0.01\n"
                       "node,S,cyclic_condition,Base,,true\n"
                       "node,S,node_state_cap,Base,,0.5\n"
                       "node,S,candidate_storages,Base,,5\n"
                       "node,S,storage_investment_variable_type,Base,,variable_type_integer\n"
                       "node,Src,nodal_balance_sense,Base,,<=\n"
                       "unit,fill,,,,\n"
                       "unit__to_node,fill|S,unit_capacity,Base,,1\n"
                       "unit__from_node,fill|Src,fuel_cost,Base,,1\n"
                       "unit__node__node,fill|Src|S,fix_ratio_in_out_unit_flow,Base,,1\n";
    auto hub = fixture::build("storage", rows, {"Base"}, 4);
    const auto& inst = hub.instance;
    auto state = [&](int h) { return inst.at({VarKind::NodeState, {}, "S", Direction::None, h}); };

    const auto& s1 = row(inst, "state:S:h0001");
    CHECK(s1.sense == milp::Sense::EQ);
    CHECK(coeff(s1, state(1)) == 1.0);
    CHECK(coeff(s1, state(0)) == doctest::Approx(-0.99).epsilon(1e-15));
    CHECK(coeff(s1, flow(inst, "fill", "S", Direction::ToNode, 1)) == -1.0);

    const auto& cap = row(inst, "statecap:S:h0002");
    CHECK(coeff(cap, inst.at({VarKind::StoragesInvestedAvailable, {}, "S", Direction::None, 0})) == -0.5);
    CHECK(inst.variables[static_cast<std::size_t>(
                             inst.at({VarKind::StoragesInvestedAvailable, {}, "S", Direction::None, 0}))]
              .domain == milp::Domain::Integer);

    const auto& cyc = row(inst, "cyclic:S");
    CHECK(coeff(cyc, state(3)) == 1.0);
    CHECK(coeff(cyc, state(-1)) == -1.0);
}

TEST_CASE("storage without a pinned or cyclic state is rejected")
{
    std::string rows = "node,S,has_state,Base,,true\n"
                       "node,S,node_state_cap,Base,,1\n";
    try
    {
        fixture::build("unpinned", rows, {"Base"}, 2);
        FAIL("expected UnpinnedState");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::UnpinnedState);
    }
}

namespace
{

// A restart is allowed only after at least `d` off hours; the first hour
// counts as a start from an off state.
bool down_time_ok(const std::vector<int>& on, int d)
{
    int last_on = -1;
    for (int h = 0; h < static_cast<int>(on.size()); ++h)
    {
        if (!on[static_cast<std::size_t>(h)])
            continue;
        if (last_on >= 0 && h - last_on - 1 > 0 && h - last_on - 1 < d)
            return false;
        last_on = h;
    }
    return true;
}

solver::Status solve_pattern(const std::vector<int>& on, const std::string& down)
{
    std::vector<double> series(on.begin(), on.end());
    std::string rows = "node,Out,nodal_balance_sense,Base,,>=\n"
                       "unit,stack,,,,\n"
                       "unit,stack,online_variable_type,Base,,unit_online_variable_type_integer\n"
                       "unit,stack,fix_units_on,Base,,ts:on.csv\n"
                       "unit__to_node,stack|Out,unit_capacity,Base,,1\n";
    if (!down.empty())
        rows += "unit,stack,min_down_time,Base,," + down + "\n";
    auto hub = fixture::build("downtime", rows, {"Base"}, static_cast<int>(on.size()), {{"on.csv", series}});
    return solver::solve_milp(hub.instance).status;
}

} // namespace

TEST_CASE("2h minimum down time: every 4-hour on/off pattern")
{
    CHECK(solve_pattern({1, 0, 0, 1}, "2h") == solver::Status::Optimal);
    CHECK(solve_pattern({1, 0, 1, 1}, "2h") == solver::Status::Infeasible);
    for (int mask = 0; mask < 16; ++mask)
    {
        std::vector<int> on{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1};
        CAPTURE(mask);
        auto expected = down_time_ok(on, 2) ? solver::Status::Optimal : solver::Status::Infeasible;
        CHECK(solve_pattern(on, "2h") == expected);
        // Without a minimum down time only the start/stop linking remains.
        CHECK(solve_pattern(on, "") == solver::Status::Optimal);
    }
}

TEST_CASE("LP mode drops unit commitment rows and integrality")
{
    std::string rows = fixture::toy_electrolyzer("unit,elz,online_variable_type,Base,,unit_online_variable_type_integer\n"
                                                 "unit,elz,min_down_time,Base,,2h\n");
    auto milp_hub = fixture::build("mode_milp", rows, {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    auto lp_hub = fixture::build("mode_lp", rows, {"Base"}, 3, {{"price.csv", {50, 10, 30}}}, milp::Mode::Lp);
    CHECK(has_row(milp_hub.instance, "uc_link:elz"));
    CHECK(has_row(milp_hub.instance, "down_time:elz"));
    CHECK_FALSE(has_row(lp_hub.instance, "uc_link:elz"));
    CHECK_FALSE(has_row(lp_hub.instance, "down_time:elz"));
    CHECK(lp_hub.instance.integer_count() == 0);
    CHECK(milp_hub.instance.integer_count() > 0);
    std::size_t uc_rows = 0;
    for (const auto& c : milp_hub.instance.constraints)
        uc_rows += c.tag.rfind("uc_link:", 0) == 0 || c.tag.rfind("down_time:", 0) == 0;
    CHECK(lp_hub.instance.constraints.size() + uc_rows == milp_hub.instance.constraints.size());
}

TEST_CASE("user constraints sum units_on over the horizon")
{
    std::string rows = "node,Out,nodal_balance_sense,Base,,>=\n"
                       "unit,a,,,,\n"
                       "unit,b,,,,\n"
                       "unit__to_node,a|Out,unit_capacity,Base,,1\n"
                       "unit__to_node,b|Out,unit_capacity,Base,,1\n"
                       "user_constraint,cap,constraint_sense,Base,,<=\n"
                       "user_constraint,cap,right_hand_side,Base,,4\n"
                       "user_constraint__unit,cap|a,units_on_coefficient,Base,,1\n"
                       "user_constraint__unit,cap|b,units_on_coefficient,Base,,1\n";
    auto hub = fixture::build("user", rows, {"Base"}, 4);
    const auto& inst = hub.instance;
    const auto& c = row(inst, "user:cap");
    CHECK(c.terms.size() == 8);
    CHECK(c.rhs == 4.0);
    std::vector<double> x(inst.variables.size(), 0.0);
    for (int h = 0; h < 2; ++h)
    {
        x[static_cast<std::size_t>(unit_var(inst, VarKind::UnitsOn, "a", h))] = 1;
        x[static_cast<std::size_t>(unit_var(inst, VarKind::UnitsOn, "b", h + 2))] = 1;
    }
    CHECK(milp::activity(c, x) == 4.0);
    CHECK(milp::violation(c, x) == 0.0);

    std::string zero = rows;
    zero.replace(zero.find("right_hand_side,Base,,4"), 23, "right_hand_side,Base,,0");
    auto zhub = fixture::build("user_zero", zero + "unit__to_node,a|Out,fuel_cost,Base,,-1\n", {"Base"}, 4);
    auto sol = solver::solve_milp(zhub.instance);
    REQUIRE(sol.status == solver::Status::Optimal);
    for (int h = 0; h < 4; ++h)
        CHECK(sol.values[static_cast<std::size_t>(unit_var(zhub.instance, VarKind::UnitsOn, "a", h))] ==
              doctest::Approx(0.0));
}

TEST_CASE("candidate units without any capacity are rejected")
{
    try
    {
        fixture::build("nocap", "unit,u,,,,\nunit,u,candidate_units,Base,,3\n", {"Base"}, 2);
        FAIL("expected MissingCapacity");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::MissingCapacity);
    }
}

TEST_CASE("compilation is deterministic")
{
    auto a = fixture::build("det_a", fixture::toy_electrolyzer(), {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    auto b = fixture::build("det_b", fixture::toy_electrolyzer(), {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    REQUIRE(a.instance.variables.size() == b.instance.variables.size());
    REQUIRE(a.instance.constraints.size() == b.instance.constraints.size());
    for (std::size_t i = 0; i < a.instance.constraints.size(); ++i)
    {
        CHECK(a.instance.constraints[i].tag == b.instance.constraints[i].tag);
        CHECK(a.instance.constraints[i].terms == b.instance.constraints[i].terms);
    }
    CHECK(a.instance.objective == b.instance.objective);
}

TEST_SUITE_END();
