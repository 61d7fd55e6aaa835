#include "hubopt/solver/solution_io.hpp"

#include "hubopt/error.hpp"
#include "hubopt/solver/solver.hpp"
#include "hubopt/text.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace hubopt::solver
{

void write_solution(const milp::MILPInstance& instance, const Solution& solution, std::ostream& out)
{
    out << "# status " << to_string(solution.status) << '\n';
    out << "# objective " << format_number(solution.objective) << '\n';
    out << "# best_bound " << format_number(solution.best_bound) << '\n';
    out << "# gap " << format_number(solution.gap) << '\n';
    for (std::size_t j = 0; j < instance.variables.size() && j < solution.values.size(); ++j)
        if (!std::isnan(solution.values[j]))
            out << milp::variable_name(instance.variables[j].ref) << ' ' << format_number(solution.values[j]) << '\n';
}

void write_solution(const milp::MILPInstance& instance, const Solution& solution, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    write_solution(instance, solution, out);
    if (!out)
        throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

Solution parse_solution(std::istream& in, const milp::MILPInstance& instance, const TagMap* tags)
{
    const auto n = instance.variables.size();
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        index.emplace(milp::variable_name(instance.variables[j].ref), j);

    Solution sol;
    sol.status = Status::GapLimit;
    sol.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> seen(n, 0);
    std::optional<double> bound;
    std::string text;
    int line_no = 0;
    auto malformed = [&](const std::string& what) {
        return Error(ErrorCode::MalformedLine, fmt::format("solution line {}: {}", line_no, what));
    };

    while (std::getline(in, text))
    {
        ++line_no;
        auto line = trim(text);
        if (line.empty())
            continue;
        std::istringstream fields{std::string(line)};
        std::string name, value, extra;
        if (line.front() == '#')
        {
            // Headers are comments to other readers; unknown ones are ignored.
            std::string hash;
            fields >> hash >> name >> value;
            if (name == "status")
            {
                auto s = parse_status(value);
                if (!s)
                    throw malformed("unknown status '" + value + "'");
                sol.status = *s;
            }
            else if (name == "best_bound")
                bound = parse_number(value);
            continue;
        }
        fields >> name >> value;
        if (value.empty() || (fields >> extra))
            throw malformed("expected '<name> <value>'");
        auto v = parse_number(value);
        if (!v)
            throw malformed("bad number '" + value + "'");
        auto it = index.find(name);
        if (it == index.end() && tags)
            if (auto t = tags->columns.find(name); t != tags->columns.end())
                it = index.find(t->second);
        if (it == index.end())
            throw Error(ErrorCode::UnknownVariable, fmt::format("solution line {}: {}", line_no, name));
        if (seen[it->second])
            throw malformed("variable listed twice: " + name);
        seen[it->second] = 1;
        sol.values[it->second] = *v;
    }

    bool complete = std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    if (complete && sol.has_values())
    {
        sol.objective = milp::evaluate_objective(instance, sol.values);
        sol.best_bound = bound ? std::min(*bound, sol.objective) : sol.objective;
        sol.gap = relative_gap(sol.objective, sol.best_bound);
    }
    else if (bound)
        sol.best_bound = *bound;
    return sol;
}

Solution read_solution(const std::filesystem::path& path, const milp::MILPInstance& instance, const TagMap* tags)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    return parse_solution(in, instance, tags);
}

namespace
{

std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s)
        out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

std::string substitute(std::string text, std::string_view key, const std::string& value)
{
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
        text.replace(pos, key.size(), value);
    return text;
}

} // namespace

Solution external_solve(const milp::MILPInstance& instance, const std::string& command_template,
                        const SolverConfig& config, const std::filesystem::path& workdir)
{
    if (command_template.find("{mps}") == std::string::npos || command_template.find("{sol}") == std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "solver command needs {mps} and {sol} placeholders");
    std::filesystem::create_directories(workdir);
    auto mps = workdir / "model.mps";
    auto sol_path = workdir / "model.sol";
    write_mps(instance, mps);
    write_tags(instance, tags_path(mps));
    std::filesystem::remove(sol_path);

    auto command = substitute(command_template, "{mps}", shell_quote(mps.string()));
    command = substitute(command, "{sol}", shell_quote(sol_path.string()));
    int rc = std::system(command.c_str());
    if (rc != 0)
        throw Error(ErrorCode::SubprocessFailure, fmt::format("'{}' exited with status {}", command, rc));
    if (!std::filesystem::exists(sol_path))
        throw Error(ErrorCode::SubprocessFailure, fmt::format("'{}' wrote no solution file", command));

    auto tags = read_tags(tags_path(mps));
    Solution sol = read_solution(sol_path, instance, &tags);
    if (sol.has_values())
    {
        for (std::size_t j = 0; j < sol.values.size(); ++j)
            if (std::isnan(sol.values[j]))
                throw Error(ErrorCode::SubprocessFailure,
                            "solution has no value for " + milp::variable_name(instance.variables[j].ref));
        require_feasible(instance, sol, config);
    }
    return sol;
}

} // namespace hubopt::solver
