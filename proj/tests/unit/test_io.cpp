#include "hub_fixture.hpp"

#include "hubopt/error.hpp"
#include "hubopt/solver/lp.hpp"
#include "hubopt/solver/mps.hpp"
#include "hubopt/solver/solution_io.hpp"
#include "hubopt/solver/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace hubopt;
using namespace hubopt::solver;

namespace
{

void check_same(const LpProblem& a, const LpProblem& b)
{
    CHECK(a.a.rows == b.a.rows);
    CHECK(a.a.cols == b.a.cols);
    CHECK(a.a.start == b.a.start);
    CHECK(a.a.index == b.a.index);
    CHECK(a.a.value == b.a.value);
    CHECK(a.cost == b.cost);
    CHECK(a.col_lower == b.col_lower);
    CHECK(a.col_upper == b.col_upper);
    CHECK(a.row_lower == b.row_lower);
    CHECK(a.row_upper == b.row_upper);
    CHECK(a.integer == b.integer);
    CHECK(a.offset == b.offset);
}

MpsModel round_trip(const milp::MILPInstance& inst)
{
    std::stringstream buf;
    write_mps(inst, buf, "T");
    return parse_mps(buf);
}

ErrorCode error_of(auto&& fn)
{
    try
    {
        fn();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

// Every bound shape the writer distinguishes, with awkward coefficients.
milp::MILPInstance bound_zoo()
{
    milp::MILPInstance inst;
    auto add = [&](int t, milp::Domain d, double lo, double up) {
        return inst.add_variable({milp::VarKind::UnitFlow, "u", "n", milp::Direction::ToNode, t}, d, lo, up);
    };
    int free = add(0, milp::Domain::Continuous, -milp::kInf, milp::kInf);
    int neg = add(1, milp::Domain::Continuous, -milp::kInf, 3.5);
    int fixed = add(2, milp::Domain::Continuous, 0.1, 0.1);
    int bin = add(3, milp::Domain::Binary, 0, 1);
    int gen = add(4, milp::Domain::Integer, 0, milp::kInf);
    int lo = add(5, milp::Domain::Continuous, -2.25, milp::kInf);
    int boxed = add(6, milp::Domain::Integer, -1, 7);
    int unused = add(7, milp::Domain::Continuous, 0, 1);
    (void)unused;
    inst.constraints.push_back({{{free, 1.0 / 3.0}, {neg, -1e-7}, {bin, 53.6}}, milp::Sense::LE, 2.0 / 7.0, "a"});
    inst.constraints.push_back({{{fixed, 1.0}, {gen, 9.9999}}, milp::Sense::GE, -1e12, "b"});
    inst.constraints.push_back({{{lo, 1.0}, {boxed, -4.965}, {free, 1.0}}, milp::Sense::EQ, 0.0, "c"});
    inst.objective = {{free, 0.1}, {gen, -2160.0}, {boxed, 1e-9}};
    inst.objective_offset = 12.5;
    return inst;
}

} // namespace

TEST_CASE("MPS round-trip reproduces every bound type")
{
    auto inst = bound_zoo();
    auto model = round_trip(inst);
    CHECK(model.name == "T");
    CHECK(model.column_names.front() == "C0000001");
    CHECK(model.row_names.back() == "R0000003");
    check_same(model.lp, to_lp(inst));
}

TEST_CASE("MPS writer wraps integer columns in markers")
{
    auto inst = bound_zoo();
    std::stringstream buf;
    write_mps(inst, buf);
    auto text = buf.str();
    for (const char* section : {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"})
        CHECK(text.find(section) != std::string::npos);
    auto open = text.find("'INTORG'");
    auto close = text.find("'INTEND'");
    REQUIRE(open != std::string::npos);
    REQUIRE(close != std::string::npos);
    CHECK(open < text.find("C0000004"));
    CHECK(text.find("C0000004") < close);
    CHECK(text.find(" N  COST") != std::string::npos);
}

TEST_CASE("MPS round-trip on the bundled S0 week")
{
    auto hub = fixture::bundled("S0", 24);
    check_same(round_trip(hub.instance).lp, to_lp(hub.instance));

    // Writing twice gives the same bytes.
    std::stringstream a, b;
    write_mps(hub.instance, a);
    write_mps(hub.instance, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("MPS reader rejects malformed input")
{
    std::istringstream bad("NAME X\nROWS\n N COST\nCOLUMNS\n C1 NOPE 1\nRHS\nENDATA\n");
    CHECK(error_of([&] { parse_mps(bad); }) == ErrorCode::ParseError);
}

TEST_CASE("tags sidecar maps generated names back")
{
    auto hub = fixture::build("tags", fixture::toy_electrolyzer(), {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    auto dir = fixture::scratch_dir("tags_out");
    write_mps(hub.instance, dir / "toy.mps");
    CHECK(tags_path(dir / "toy.mps") == dir / "toy.tags");
    write_tags(hub.instance, tags_path(dir / "toy.mps"));
    auto tags = read_tags(dir / "toy.tags");
    REQUIRE(tags.columns.size() == hub.instance.variables.size());
    REQUIRE(tags.rows.size() == hub.instance.constraints.size());
    CHECK(tags.columns.at("C0000001") == milp::variable_name(hub.instance.variables[0].ref));
    CHECK(tags.rows.at(mps_row_name(0)) == hub.instance.constraints[0].tag);
    CHECK(read_mps(dir / "toy.mps").column_names.size() == hub.instance.variables.size());
}

TEST_CASE("solution files round-trip by variable name")
{
    auto hub = fixture::build("solio", fixture::toy_electrolyzer("", 110), {"Base"}, 24,
                              {{"price.csv", std::vector<double>(24, 10.0)}});
    const auto& inst = hub.instance;
    auto sol = solve_milp(inst);
    REQUIRE(sol.status == Status::Optimal);

    std::stringstream buf;
    write_solution(inst, sol, buf);
    auto text = buf.str();
    auto line = text.find("\nunit_flow.elz.H2.h0017 ");
    REQUIRE(line != std::string::npos);
    CHECK(std::stod(text.substr(line + 24)) == doctest::Approx(0.891).epsilon(1e-12));
    auto back = parse_solution(buf, inst);
    CHECK(back.status == Status::Optimal);
    CHECK(back.values == sol.values);
    CHECK(back.objective == doctest::Approx(sol.objective).epsilon(1e-12));

    std::istringstream one("unit_flow.elz.H2.h0017 0.891\n");
    auto partial = parse_solution(one, inst);
    int h17 = inst.at({milp::VarKind::UnitFlow, "elz", "H2", milp::Direction::ToNode, 17});
    CHECK(partial.values[static_cast<std::size_t>(h17)] == 0.891);
    CHECK(std::isnan(partial.values[0]));
}

TEST_CASE("solution reader edge cases")
{
    auto hub = fixture::build("solio_edge", fixture::toy_electrolyzer(), {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    const auto& inst = hub.instance;
    std::string name = milp::variable_name(inst.variables[0].ref);

    std::istringstream empty("");
    auto sol = parse_solution(empty, inst);
    CHECK(sol.status == Status::GapLimit);
    CHECK(std::all_of(sol.values.begin(), sol.values.end(), [](double v) { return std::isnan(v); }));

    std::istringstream comments("# produced elsewhere\n\n" + name + " 1\n");
    CHECK(parse_solution(comments, inst).values[0] == 1.0);

    auto code = [&](const std::string& text) {
        std::istringstream in(text);
        return error_of([&] { parse_solution(in, inst); });
    };
    CHECK(code(name + " 1\n" + name + " 2\n") == ErrorCode::MalformedLine);
    CHECK(code("no_such_var 1\n") == ErrorCode::UnknownVariable);
    CHECK(code(name + "\n") == ErrorCode::MalformedLine);
    CHECK(code(name + " 1 2\n") == ErrorCode::MalformedLine);
    CHECK(code(name + " abc\n") == ErrorCode::MalformedLine);
    CHECK(code("# status Sideways\n") == ErrorCode::MalformedLine);

    TagMap tags;
    tags.columns["C0000001"] = name;
    std::istringstream mapped("C0000001 4\n");
    CHECK(parse_solution(mapped, inst, &tags).values[0] == 4.0);
}

TEST_CASE("external solver failures surface as errors")
{
    auto hub = fixture::build("ext", fixture::toy_electrolyzer(), {"Base"}, 3, {{"price.csv", {50, 10, 30}}});
    const auto& inst = hub.instance;
    auto dir = fixture::scratch_dir("ext_run");
    SolverConfig config;

    auto run = [&](const std::string& cmd) { return error_of([&] { external_solve(inst, cmd, config, dir); }); };
    CHECK(run("cp {mps} /dev/null") == ErrorCode::InvalidArgument);
    CHECK(run("false {mps} {sol}") == ErrorCode::SubprocessFailure);
    CHECK(run("true {mps} {sol}") == ErrorCode::SubprocessFailure);

    // An answer that breaks Eq5 (flow without any unit on).
    auto bad = dir / "bad.sol";
    {
        std::ofstream out(bad);
        out << "# status Optimal\n";
        for (std::size_t j = 0; j < inst.variables.size(); ++j)
            out << milp::variable_name(inst.variables[j].ref) << ' '
                << (inst.variables[j].ref.kind == milp::VarKind::UnitFlow ? 0.5 : 0.0) << '\n';
    }
    CHECK(run("cp " + bad.string() + " {sol} # {mps}") == ErrorCode::AuditFailure);

    // A correct answer passes through unchanged.
    auto good = dir / "good.sol";
    auto reference = solve_milp(inst);
    write_solution(inst, reference, good);
    auto sol = external_solve(inst, "cp " + good.string() + " {sol} # {mps}", config, dir);
    CHECK(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(reference.objective).epsilon(1e-12));
    CHECK(std::filesystem::exists(dir / "model.mps"));
    CHECK(std::filesystem::exists(dir / "model.tags"));
}
