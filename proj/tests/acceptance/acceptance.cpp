// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "hub_fixture.hpp"
#include "oracles/dense_lp.hpp"

#include "hubopt/solver/lp.hpp"
#include "hubopt/solver/mps.hpp"
#include "hubopt/solver/solution_io.hpp"
#include "hubopt/solver/solver.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>

using namespace hubopt;
using milp::Direction;
using milp::VarKind;
using Clock = std::chrono::steady_clock;

namespace
{

int failures = 0;

void report(bool pass, std::string_view name, const std::string& detail)
{
    fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double value(const fixture::Hub& hub, const solver::Solution& sol, const milp::VariableRef& ref)
{
    auto id = hub.instance.find(ref);
    return id ? sol.values[static_cast<std::size_t>(*id)] : 0.0;
}

struct Run
{
    std::string stack;
    fixture::Hub hub;
    solver::Solution sol;
    double seconds = 0.0;
};

// ---------------------------------------------------------------------------

constexpr int kSweepHours = 168;
constexpr std::int64_t kSweepNodes = 100;

std::vector<Run> sweep()
{
    std::vector<Run> runs;
    solver::SolverConfig config;
    config.node_limit = kSweepNodes;
    for (int s = 0; s <= 11; ++s)
    {
        Run run;
        run.stack = fmt::format("S{}", s);
        auto t0 = Clock::now();
        run.hub = fixture::bundled(run.stack, kSweepHours);
        run.sol = solver::solve_milp(run.hub.instance, config);
        run.seconds = seconds_since(t0);
        fmt::print("  {:4} {:9} objective {:14.6f} bound {:14.6f} nodes {:4} {:6.1f}s\n", run.stack,
                   solver::to_string(run.sol.status), run.sol.objective, run.sol.best_bound, run.sol.nodes,
                   run.seconds);
        std::fflush(stdout);
        runs.push_back(std::move(run));
    }
    return runs;
}

void check_audit(const std::vector<Run>& runs)
{
    bool pass = true;
    double worst = 0.0, slowest = 0.0;
    std::string notes;
    for (const auto& r : runs)
    {
        slowest = std::max(slowest, r.seconds);
        if (!r.sol.has_values())
        {
            pass = false;
            notes += fmt::format(" {} returned {};", r.stack, solver::to_string(r.sol.status));
            continue;
        }
        auto a = milp::audit(r.hub.instance, r.sol.values, 1e-6, 1e-6);
        worst = std::max(worst, a.max_residual);
        if (!a.ok || a.max_residual > 1e-6)
        {
            pass = false;
            notes += fmt::format(" {} violates {} by {:.3g};", r.stack, a.worst, a.max_residual);
        }
        if (r.seconds >= 120.0)
        {
            pass = false;
            notes += fmt::format(" {} took {:.1f}s;", r.stack, r.seconds);
        }
    }
    report(pass, "constraint audit S0-S11 at 168h",
           fmt::format("max residual {:.2e}, slowest {:.1f}s (node limit {}){}", worst, slowest, kSweepNodes, notes));
}

void check_ratios(const std::vector<Run>& runs)
{
    struct Ratio
    {
        const char* node;
        Direction dir;
        double r;
    };
    const Ratio ratios[] = {{"El", Direction::FromNode, 53.6},
                            {"H2O_in", Direction::FromNode, 9.9999},
                            {"Heat_out", Direction::ToNode, 9.763},
                            {"O_out", Direction::ToNode, 4.965}};
    double worst = 0.0;
    int hours = 0;
    for (const auto& r : runs)
    {
        if (!r.sol.has_values())
            continue;
        const auto& g = r.hub.graph;
        for (int h = 0; h < r.hub.instance.meta.hours; ++h)
        {
            double h2 = 0.0;
            for (const auto& n : g.expand("Group_H2_mFRR"))
                h2 += value(r.hub, r.sol, {VarKind::UnitFlow, "H2_syn", n, Direction::ToNode, h});
            if (h2 <= 1e-9)
                continue;
            ++hours;
            for (const auto& ratio : ratios)
            {
                double flow = 0.0;
                auto members = std::string(ratio.node) == "El" ? g.expand("Group_El") : g.expand(ratio.node);
                for (const auto& n : members)
                    flow += value(r.hub, r.sol, {VarKind::UnitFlow, "H2_syn", n, ratio.dir, h});
                worst = std::max(worst, std::abs(flow - ratio.r * h2));
            }
        }
    }
    report(worst <= 1e-6 && hours > 0, "electrolyzer ratios",
           fmt::format("{} producing hours, max deviation {:.2e}", hours, worst));
}

void check_premiums(const std::vector<Run>& runs)
{
    auto profit = [&](const std::string& stack) {
        for (const auto& r : runs)
            if (r.stack == stack && r.sol.has_values())
                return -r.sol.objective;
        return std::nan("");
    };
    bool pass = true;
    std::string detail;
    for (auto [family, a, b, c] : {std::tuple{"H2", "S0", "S1", "S2"}, std::tuple{"H2+PPA", "S3", "S4", "S5"},
                                   std::tuple{"MeOH", "S6", "S7", "S8"}})
    {
        double pa = profit(a), pb = profit(b), pc = profit(c);
        bool ok = pa <= pb + 1e-6 && pb <= pc + 1e-6;
        pass = pass && ok;
        detail += fmt::format("{}{} {:.2f} <= {:.2f} <= {:.2f}{}", detail.empty() ? "" : "; ", family, pa, pb, pc,
                              ok ? "" : " (violated)");
    }
    report(pass, "premium monotonicity", detail);
}

void check_cyclic(const std::vector<Run>& runs)
{
    double worst = 0.0;
    int checked = 0;
    for (const auto& r : runs)
    {
        if (!r.sol.has_values())
            continue;
        int hours = r.hub.instance.meta.hours;
        int periods = static_cast<int>(r.hub.instance.meta.period_weight.size());
        for (const auto& [name, node] : r.hub.graph.nodes)
        {
            model::EntityRef ref{model::EntityClass::Node, name};
            if (!r.hub.view.flag(ref, "cyclic_condition").value_or(false))
                continue;
            double invested =
                value(r.hub, r.sol, {VarKind::StoragesInvestedAvailable, {}, name, Direction::None, periods - 1});
            if (invested <= 1e-9)
                continue;
            ++checked;
            double first = value(r.hub, r.sol, {VarKind::NodeState, {}, name, Direction::None, -1});
            double last = value(r.hub, r.sol, {VarKind::NodeState, {}, name, Direction::None, hours - 1});
            worst = std::max(worst, std::abs(last - first));
        }
    }
    report(worst <= 1e-6, "storage cyclicity",
           fmt::format("{} invested cyclic storages, max |state(last) - state(initial)| {:.2e}", checked, worst));
}

// ---------------------------------------------------------------------------

oracle::DenseLp dense_of(const solver::LpProblem& lp)
{
    oracle::DenseLp d;
    d.cost = lp.cost;
    d.offset = lp.offset;
    d.col_lower = lp.col_lower;
    d.col_upper = lp.col_upper;
    d.integer = lp.integer;
    d.row_lower = lp.row_lower;
    d.row_upper = lp.row_upper;
    d.rows.assign(static_cast<std::size_t>(lp.rows()), std::vector<double>(static_cast<std::size_t>(lp.cols()), 0.0));
    for (int j = 0; j < lp.cols(); ++j)
        for (int k = lp.a.start[static_cast<std::size_t>(j)]; k < lp.a.start[static_cast<std::size_t>(j) + 1]; ++k)
            d.rows[static_cast<std::size_t>(lp.a.index[static_cast<std::size_t>(k)])][static_cast<std::size_t>(j)] =
                lp.a.value[static_cast<std::size_t>(k)];
    return d;
}

// Four-hour hub: an electrolyzer family bought in whole units (0..4), a
// continuous tank, and direct or stored sales.
std::string mini_hub(std::mt19937_64& rng, std::vector<double>& price)
{
    std::uniform_real_distribution<double> p(0.0, 80.0), u(0.0, 1.0);
    std::uniform_int_distribution<int> cand(0, 4);
    price.clear();
    for (int h = 0; h < 4; ++h)
        price.push_back(std::round(p(rng)));
    double sale = -std::round(1500 + 1500 * u(rng));
    return fmt::format(
        "node,El,nodal_balance_sense,Base,,<=\n"
        "node,H2,nodal_balance_sense,Base,,==\n"
        "node,Out,nodal_balance_sense,Base,,>=\n"
        "node,T,has_state,Base,,true\n"
        "node,T,cyclic_condition,Base,,true\n"
        "node,T,node_state_cap,Base,,0.5\n"
        "node,T,frac_state_loss,Base,,{}\n"
        "node,T,candidate_storages,Base,,{}\n"
        "node,T,storage_investment_cost,Base,,{}\n"
        "node,T,storage_investment_variable_type,Base,,variable_type_continuous\n"
        "unit,elz,,,,\n"
        "unit,elz,number_of_units,Base,,0\n"
        "unit,elz,candidate_units,Base,,{}\n"
        "unit,elz,unit_investment_cost,Base,,{}\n"
        "unit,elz,fom_cost,Base,,{}\n"
        "unit,elz,unit_investment_variable_type,Base,,unit_investment_variable_type_integer\n"
        "unit__to_node,elz|H2,unit_capacity,Base,,0.1\n"
        "unit__to_node,elz|H2,minimum_operating_point,Base,,{}\n"
        "unit__from_node,elz|El,fuel_cost,Base,,ts:price.csv\n"
        "unit__node__node,elz|El|H2,fix_ratio_in_out_unit_flow,Base,,53.6\n"
        "unit,sell,,,,\n"
        "unit__to_node,sell|Out,unit_capacity,Base,,{}\n"
        "unit__to_node,sell|Out,fuel_cost,Base,,{}\n"
        "unit__node__node,sell|H2|Out,fix_ratio_in_out_unit_flow,Base,,1\n"
        "unit,charge,,,,\n"
        "unit__node__node,charge|H2|T,fix_ratio_in_out_unit_flow,Base,,1\n"
        "unit,discharge,,,,\n"
        "unit__node__node,discharge|T|Out,fix_ratio_in_out_unit_flow,Base,,1\n"
        "unit__to_node,discharge|Out,fuel_cost,Base,,{}\n",
        std::round(100 * u(rng)) / 1000, cand(rng), std::round(2e5 * u(rng)), cand(rng),
        std::round(4e5 * u(rng)), std::round(2e5 * u(rng)), std::round(10 * u(rng)) / 20,
        std::round(10 + 30 * u(rng)) / 100, sale, sale + std::round(100 * u(rng)));
}

void check_oracle()
{
    auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    solver::SolverConfig config;
    config.relative_gap = 1e-9;
    int trials = 0, matched = 0, max_ints = 0, invested = 0;
    double worst = 0.0;
    for (; trials < 200; ++trials)
    {
        std::vector<double> price;
        auto rows = mini_hub(rng, price);
        auto hub = fixture::build("oracle", rows, {"Base"}, 4, {{"price.csv", price}});
        max_ints = std::max(max_ints, static_cast<int>(hub.instance.integer_count()));
        auto ref = oracle::solve_milp(dense_of(solver::to_lp(hub.instance)));
        auto sol = solver::solve_milp(hub.instance, config);
        if (ref.outcome != oracle::Outcome::Optimal || sol.status != solver::Status::Optimal)
        {
            fmt::print("  trial {}: oracle {} builtin {}\n", trials, static_cast<int>(ref.outcome),
                       solver::to_string(sol.status));
            continue;
        }
        double rel = std::abs(sol.objective - ref.objective) / std::max(1.0, std::abs(ref.objective));
        worst = std::max(worst, rel);
        matched += rel <= 1e-6;
        invested += value(hub, sol, {VarKind::UnitsInvestedAvailable, "elz", {}, Direction::None, 0}) > 0.5;
    }
    double secs = seconds_since(t0);
    report(matched == trials && max_ints <= 3 && secs < 60.0, "oracle equivalence",
           fmt::format("{}/{} mini-hubs match enumeration (max rel. diff {:.1e}, {} with investment, <= {} integer "
                       "vars), {:.1f}s",
                       matched, trials, worst, invested, max_ints, secs));
}

void check_eq_suite(int argc, char** argv)
{
    doctest::Context ctx(argc, argv);
    ctx.setOption("test-suite", "eq");
    ctx.setOption("minimal", true);
    int rc = ctx.run();
    report(rc == 0, "Eq1-Eq5 unit suite", rc == 0 ? "all fixtures pass" : "doctest reported failures");
}

void check_sandwich()
{
    auto milp_hub = fixture::bundled("S3", 24);
    auto lp_hub = fixture::bundled("S3", 24, milp::Mode::Lp);
    auto m = solver::solve_milp(milp_hub.instance);
    auto l = solver::solve_lp(lp_hub.instance);
    bool pass = m.status == solver::Status::Optimal && l.status == solver::Status::Optimal &&
                l.objective <= m.objective + 1e-9 * std::max(1.0, std::abs(m.objective));
    report(pass, "LP/MILP sandwich S3 at 24h",
           fmt::format("lp {} {:.6f} <= milp {} {:.6f}, gap {:.3e}", solver::to_string(l.status), l.objective,
                       solver::to_string(m.status), m.objective, solver::relative_gap(m.objective, l.objective)));
}

void check_mps()
{
    auto hub = fixture::bundled("S0", 24);
    std::stringstream buf;
    solver::write_mps(hub.instance, buf);
    auto parsed = solver::parse_mps(buf).lp;
    auto lp = solver::to_lp(hub.instance);
    bool same = parsed.a.start == lp.a.start && parsed.a.index == lp.a.index && parsed.a.value == lp.a.value &&
                parsed.cost == lp.cost && parsed.col_lower == lp.col_lower && parsed.col_upper == lp.col_upper &&
                parsed.row_lower == lp.row_lower && parsed.row_upper == lp.row_upper &&
                parsed.integer == lp.integer && parsed.offset == lp.offset;
    std::string detail = fmt::format("re-parse {} ({} rows, {} cols, {} nonzeros)",
                                     same ? "identical" : "DIFFERS", lp.rows(), lp.cols(), lp.a.nnz());

    bool external_ok = true;
    if (std::system("python3 -c 'import highspy' >/dev/null 2>&1") == 0)
    {
        solver::SolverConfig config;
        auto builtin = solver::solve_milp(hub.instance, config);
        try
        {
            auto dir = fixture::scratch_dir("acceptance_highs");
            auto ext = solver::external_solve(
                hub.instance, std::string("python3 ") + HUBOPT_TOOLS_DIR + "/highs_solve.py {mps} {sol}", config, dir);
            double rel = std::abs(ext.objective - builtin.objective) / std::max(std::abs(builtin.objective), 1e-300);
            external_ok = ext.has_values() && rel <= 1e-5;
            detail += fmt::format("; HiGHS {:.10g} vs builtin {:.10g} (rel. diff {:.1e}, audited)", ext.objective,
                                  builtin.objective, rel);
        }
        catch (const std::exception& e)
        {
            external_ok = false;
            detail += fmt::format("; external solve failed: {}", e.what());
        }
    }
    else
        detail += "; no external MILP solver found";
    report(same && external_ok, "MPS round-trip", detail);
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_determinism()
{
    std::vector<std::filesystem::path> dirs{fixture::scratch_dir("det_1"), fixture::scratch_dir("det_2")};
    for (const auto& dir : dirs)
    {
        auto cmd = fmt::format("'{}' solve --model '{}/gls.csv' --timeseries '{}/ts' --stack S3 --horizon 24h "
                               "--candidate-scale 0.1 --out '{}' --mps '{}/model.mps' > /dev/null",
                               HUBOPT_CLI, HUBOPT_TEST_DATA_DIR, HUBOPT_TEST_DATA_DIR, dir.string(), dir.string());
        if (std::system(cmd.c_str()) != 0)
        {
            report(false, "determinism", "hubopt solve failed: " + cmd);
            return;
        }
    }
    int files = 0;
    std::string differ;
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0]))
    {
        ++files;
        auto name = entry.path().filename();
        if (slurp(entry.path()) != slurp(dirs[1] / name))
            differ += " " + name.string();
    }
    report(differ.empty() && files >= 6, "determinism",
           fmt::format("{} files compared across two hubopt solve runs{}", files,
                       differ.empty() ? ", byte-identical" : "; differ:" + differ));
}

} // namespace

int main(int argc, char** argv)
{
    check_eq_suite(argc, argv);
    check_oracle();
    check_sandwich();
    check_mps();
    check_determinism();
    auto runs = sweep();
    check_audit(runs);
    check_ratios(runs);
    check_premiums(runs);
    check_cyclic(runs);
    fmt::print("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
