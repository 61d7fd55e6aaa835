#include "hubopt/cli/cli.hpp"

#include "hubopt/error.hpp"
#include "hubopt/milp/compiler.hpp"
#include "hubopt/model/dataset.hpp"
#include "hubopt/model/validate.hpp"
#include "hubopt/report/kpis.hpp"
#include "hubopt/scenario/scenario.hpp"
#include "hubopt/solver/mps.hpp"
#include "hubopt/solver/solution_io.hpp"
#include "hubopt/solver/solver.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include <cstdlib>
#include <filesystem>
#include <ostream>

namespace hubopt::cli
{

namespace
{

namespace fs = std::filesystem;

fs::path default_data_dir()
{
    if (const char* dir = std::getenv("HUBOPT_DATA_DIR"); dir && *dir)
        return dir;
    return "data";
}

struct Options
{
    std::string model;
    std::string timeseries;
    std::string stack;
    std::vector<std::string> layers;
    std::string horizon;
    std::string mode = "milp";
    double candidate_scale = 1.0;
    std::string out;
    std::string mps;
    std::string solver = "builtin";
    std::string solver_cmd;
    std::string solution;
    bool annualize = false;
    bool check = false;
    std::int64_t node_limit = solver::SolverConfig{}.node_limit;
    double time_limit = 0.0;
    double gap = solver::SolverConfig{}.relative_gap;
    bool verbose = false;
};

class Diagnostics : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

void add_data_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("--model", o.model, "Dataset CSV (default $HUBOPT_DATA_DIR/gls.csv)");
    cmd->add_option("--timeseries", o.timeseries, "Directory of ts: series (default $HUBOPT_DATA_DIR/ts)");
}

void add_scenario_options(CLI::App* cmd, Options& o)
{
    add_data_options(cmd, o);
    cmd->add_option("--stack", o.stack, "Built-in scenario stack (S0..S11, S6-opt, S9-opt, a, b)");
    cmd->add_option("--layer", o.layers, "Scenario layer, lowest priority first; appended to --stack");
    cmd->add_option("--horizon", o.horizon, "Horizon from model_start, e.g. 168h (default model_end)");
    cmd->add_option("--mode", o.mode, "milp or lp")->check(CLI::IsMember({"milp", "lp"}));
    cmd->add_option("--candidate-scale", o.candidate_scale, "Multiply candidate_units/candidate_storages")
        ->check(CLI::PositiveNumber);
}

void add_solver_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("--node-limit", o.node_limit, "Branch-and-bound node limit")->check(CLI::NonNegativeNumber);
    cmd->add_option("--time-limit", o.time_limit, "Seconds; 0 = none (results then depend on timing)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--gap", o.gap, "Relative gap tolerance")->check(CLI::PositiveNumber);
    cmd->add_flag("--verbose", o.verbose, "Solver progress on stderr");
}

model::EntityGraph load(const Options& o, std::ostream& err)
{
    fs::path model = o.model.empty() ? default_data_dir() / "gls.csv" : fs::path(o.model);
    fs::path ts = o.timeseries.empty() ? (o.model.empty() ? default_data_dir() / "ts" : model.parent_path() / "ts")
                                       : fs::path(o.timeseries);
    auto graph = model::load_dataset(model, ts);
    auto diags = model::validate_graph(graph);
    for (const auto& d : diags)
        fmt::print(err, "{}\n", model::to_string(d));
    if (model::has_errors(diags))
        throw Diagnostics(fmt::format("{} failed validation", model.string()));
    return graph;
}

scenario::ScenarioStack stack_of(const model::EntityGraph& graph, const Options& o, std::ostream& err)
{
    scenario::ScenarioStack stack;
    if (!o.stack.empty())
    {
        auto builtin = scenario::find_builtin(o.stack);
        if (!builtin)
            throw Error(ErrorCode::InvalidArgument, "unknown stack " + o.stack);
        stack = *builtin;
    }
    if (o.stack.empty() && o.layers.empty())
        throw Error(ErrorCode::InvalidArgument, "give --stack or at least one --layer");
    for (const auto& l : o.layers)
        stack.layers.push_back(l);
    if (stack.name.empty())
        stack.name = "custom";
    else if (!o.layers.empty())
        stack.name += "+";
    auto diags = scenario::check_stack(graph, stack);
    for (const auto& d : diags)
        fmt::print(err, "{}\n", model::to_string(d));
    if (model::has_errors(diags))
        throw Diagnostics("stack " + stack.name + " breaks layer rules");
    return stack;
}

struct Compiled
{
    model::EntityGraph graph;
    scenario::EffectiveView view;
    milp::MILPInstance instance;
};

Compiled compile(const Options& o, std::ostream& err)
{
    Compiled c;
    c.graph = load(o, err);
    auto stack = stack_of(c.graph, o, err);
    c.view = scenario::compose(c.graph, stack);
    if (o.candidate_scale != 1.0)
        scenario::scale_candidates(c.view, o.candidate_scale);
    std::optional<Duration> horizon;
    if (!o.horizon.empty())
    {
        horizon = parse_duration(o.horizon);
        if (!horizon || horizon->count() <= 0)
            throw Error(ErrorCode::InvalidArgument, "bad --horizon " + o.horizon);
    }
    auto blocks = milp::derive_blocks(c.graph, c.view, horizon);
    milp::CompileOptions opts;
    opts.mode = o.mode == "lp" ? milp::Mode::Lp : milp::Mode::Milp;
    opts.scenario = stack.name;
    c.instance = milp::compile(c.graph, c.view, blocks, opts);
    return c;
}

void write_mps_files(const milp::MILPInstance& instance, const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    solver::write_mps(instance, path);
    solver::write_tags(instance, solver::tags_path(path));
}

solver::SolverConfig solver_config(const Options& o)
{
    solver::SolverConfig cfg;
    cfg.node_limit = o.node_limit;
    cfg.time_limit = o.time_limit;
    cfg.relative_gap = o.gap;
    cfg.verbose = o.verbose;
    return cfg;
}

void print_summary(std::ostream& out, const report::KPIReport& r)
{
    fmt::print(out, "scenario {}\nstatus {}\nobjective {}\nbest_bound {}\ngap {}\nprofit {}\n", r.scenario,
               solver::to_string(r.status), format_number(r.objective), format_number(r.best_bound),
               format_number(r.gap), format_number(r.profit));
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err)
{
    auto graph = load(o, err);
    fmt::print(out, "{} units, {} nodes, {} groups, {} relationships, {} layers: ok\n", graph.units.size(),
               graph.nodes.size(), graph.groups.size(), graph.relationships.size(), graph.layers.size());
    return kExitOk;
}

int cmd_scenarios(const Options& o, std::ostream& out, std::ostream& err)
{
    std::optional<model::EntityGraph> graph;
    if (o.check)
        graph = load(o, err);
    bool bad = false;
    for (const auto& s : scenario::builtin_scenarios())
    {
        std::string layers;
        for (const auto& l : s.layers)
            layers += (layers.empty() ? "" : " ") + l;
        fmt::print(out, "{}: {}\n", s.name, layers);
        if (graph)
            for (const auto& d : scenario::check_stack(*graph, s))
            {
                fmt::print(err, "{}: {}\n", s.name, model::to_string(d));
                bad = bad || d.severity == model::Severity::Error;
            }
    }
    return bad ? kExitDiagnostics : kExitOk;
}

int cmd_compile(const Options& o, std::ostream& out, std::ostream& err)
{
    auto c = compile(o, err);
    write_mps_files(c.instance, o.mps);
    fmt::print(out, "{} variables ({} integer), {} constraints, {} nonzeros -> {}\n", c.instance.variables.size(),
               c.instance.integer_count(), c.instance.constraints.size(), c.instance.nonzero_count(), o.mps);
    return kExitOk;
}

int finish(const Compiled& c, const solver::Solution& sol, const Options& o, std::ostream& out, bool write_sol)
{
    fs::path dir = o.out;
    fs::create_directories(dir);
    if (write_sol)
        solver::write_solution(c.instance, sol, dir / "solution.sol");
    if (!sol.has_values())
    {
        fmt::print(out, "scenario {}\nstatus {}\n", c.instance.meta.scenario, solver::to_string(sol.status));
        return kExitSolverFailure;
    }
    report::KpiOptions ko;
    ko.annualize = o.annualize;
    auto r = report::compute_kpis(c.graph, c.view, c.instance, sol, ko);
    report::emit_results(r, c.instance, sol, dir);
    print_summary(out, r);
    return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err)
{
    auto c = compile(o, err);
    if (!o.mps.empty())
        write_mps_files(c.instance, o.mps);
    auto cfg = solver_config(o);
    solver::Solution sol;
    if (o.solver == "external")
    {
        std::string command = o.solver_cmd;
        if (const char* env = std::getenv("HUBOPT_SOLVER_CMD"); env && *env)
            command = env;
        if (command.empty())
            throw Error(ErrorCode::InvalidArgument, "--solver external needs --solver-cmd or HUBOPT_SOLVER_CMD");
        sol = solver::external_solve(c.instance, command, cfg, fs::path(o.out) / "external");
    }
    else
        sol = c.instance.meta.mode == milp::Mode::Lp ? solver::solve_lp(c.instance, cfg)
                                                      : solver::solve_milp(c.instance, cfg);
    return finish(c, sol, o, out, true);
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err)
{
    auto c = compile(o, err);
    auto sol = solver::read_solution(o.solution, c.instance);
    return finish(c, sol, o, out, false);
}

int exit_code(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::SubprocessFailure:
    case ErrorCode::AuditFailure:
    case ErrorCode::UnknownVariable:
    case ErrorCode::MalformedLine:
    case ErrorCode::MissingSolutionValue: return kExitSolverFailure;
    case ErrorCode::InvalidArgument: return kExitUsage;
    default: return kExitDiagnostics;
    }
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Capacity-expansion toolchain for P2X energy hubs"};
    app.name(args.empty() ? "hubopt" : fs::path(args[0]).filename().string());
    app.require_subcommand(1, 1);
    Options o;

    auto* validate = app.add_subcommand("validate", "Load and check a dataset");
    add_data_options(validate, o);

    auto* scenarios = app.add_subcommand("scenarios", "List built-in scenario stacks");
    add_data_options(scenarios, o);
    scenarios->add_flag("--check", o.check, "Check every stack against the dataset's layer rules");

    auto* compile_cmd = app.add_subcommand("compile", "Compile a scenario and write MPS plus tag sidecar");
    add_scenario_options(compile_cmd, o);
    compile_cmd->add_option("--mps", o.mps, "Output MPS file")->required();

    auto* solve = app.add_subcommand("solve", "Compile, solve and write result tables");
    add_scenario_options(solve, o);
    add_solver_options(solve, o);
    solve->add_option("--out", o.out, "Result directory")->required();
    solve->add_option("--mps", o.mps, "Also write the MPS file here");
    solve->add_option("--solver", o.solver, "builtin or external")->check(CLI::IsMember({"builtin", "external"}));
    solve->add_option("--solver-cmd", o.solver_cmd, "External command with {mps} and {sol} placeholders");
    solve->add_flag("--annualize", o.annualize, "Scale horizon figures to a full cost year");

    auto* report_cmd = app.add_subcommand("report", "Recompute result tables from a stored solution file");
    add_scenario_options(report_cmd, o);
    report_cmd->add_option("--solution", o.solution, "Solution file")->required();
    report_cmd->add_option("--out", o.out, "Result directory")->required();
    report_cmd->add_flag("--annualize", o.annualize, "Scale horizon figures to a full cost year");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try
    {
        if (*validate)
            return cmd_validate(o, out, err);
        if (*scenarios)
            return cmd_scenarios(o, out, err);
        if (*compile_cmd)
            return cmd_compile(o, out, err);
        if (*solve)
            return cmd_solve(o, out, err);
        return cmd_report(o, out, err);
    }
    catch (const Diagnostics& e)
    {
        fmt::print(err, "error: {}\n", e.what());
        return kExitDiagnostics;
    }
    catch (const Error& e)
    {
        fmt::print(err, "error: {}\n", e.what());
        int code = exit_code(e.code());
        if (code == kExitUsage)
            fmt::print(err, "{}", app.help());
        return code;
    }
}

} // namespace hubopt::cli
