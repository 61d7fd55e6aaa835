#include "hubopt/solver/mps.hpp"

#include "hubopt/error.hpp"
#include "hubopt/text.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace hubopt::solver
{

using milp::Domain;
using milp::Sense;

std::string mps_row_name(int i)
{
    return fmt::format("R{:07d}", i + 1);
}

std::string mps_column_name(int j)
{
    return fmt::format("C{:07d}", j + 1);
}

namespace
{

// Fixed-format fields start at columns 2, 5, 15, 25, 40 and 50. Numbers use the
// shortest round-trip form and may run past column 36 when that needs more
// than 12 characters.
void line(std::ostream& out, std::string_view type, std::string_view name1, std::string_view name2 = {},
          std::string_view number = {})
{
    std::string s = fmt::format(" {:<2} {:<8}", type, name1);
    if (!name2.empty())
        s += fmt::format("  {:<8}  {}", name2, number);
    while (!s.empty() && s.back() == ' ')
        s.pop_back();
    out << s << '\n';
}

} // namespace

void write_mps(const milp::MILPInstance& instance, std::ostream& out, std::string_view name)
{
    const auto n = instance.variables.size();
    struct Entry
    {
        int row;
        double value;
    };
    std::vector<std::vector<Entry>> columns(n);
    for (std::size_t i = 0; i < instance.constraints.size(); ++i)
        for (const auto& t : instance.constraints[i].terms)
            columns[static_cast<std::size_t>(t.var)].push_back({static_cast<int>(i), t.coeff});
    std::vector<double> cost(n, 0.0);
    for (const auto& t : instance.objective)
        cost[static_cast<std::size_t>(t.var)] += t.coeff;

    out << "NAME          " << name << '\n';
    out << "ROWS\n";
    line(out, "N", kCostRow);
    for (std::size_t i = 0; i < instance.constraints.size(); ++i)
    {
        const char* type = "E";
        switch (instance.constraints[i].sense)
        {
        case Sense::LE: type = "L"; break;
        case Sense::GE: type = "G"; break;
        case Sense::EQ: type = "E"; break;
        }
        line(out, type, mps_row_name(static_cast<int>(i)));
    }

    out << "COLUMNS\n";
    bool in_integer = false;
    int marker = 0;
    for (std::size_t j = 0; j < n; ++j)
    {
        bool integer = instance.variables[j].is_integer();
        if (integer != in_integer)
        {
            out << fmt::format("    M{:07d}  'MARKER'                 '{}'\n", ++marker,
                               integer ? "INTORG" : "INTEND");
            in_integer = integer;
        }
        auto col = mps_column_name(static_cast<int>(j));
        if (cost[j] != 0.0 || columns[j].empty())
            line(out, "", col, kCostRow, format_number(cost[j]));
        for (const auto& e : columns[j])
            line(out, "", col, mps_row_name(e.row), format_number(e.value));
    }
    if (in_integer)
        out << fmt::format("    M{:07d}  'MARKER'                 'INTEND'\n", ++marker);

    out << "RHS\n";
    if (instance.objective_offset != 0.0)
        line(out, "", "RHS", kCostRow, format_number(-instance.objective_offset));
    for (std::size_t i = 0; i < instance.constraints.size(); ++i)
        if (instance.constraints[i].rhs != 0.0)
            line(out, "", "RHS", mps_row_name(static_cast<int>(i)), format_number(instance.constraints[i].rhs));

    out << "RANGES\n";

    out << "BOUNDS\n";
    for (std::size_t j = 0; j < n; ++j)
    {
        const auto& v = instance.variables[j];
        auto col = mps_column_name(static_cast<int>(j));
        double lo = v.lower, up = v.upper;
        if (v.domain == Domain::Binary && lo == 0.0 && up == 1.0)
        {
            line(out, "BV", "BND", col);
            continue;
        }
        if (lo == up)
        {
            line(out, "FX", "BND", col, format_number(lo));
            continue;
        }
        if (lo == -milp::kInf && up == milp::kInf)
        {
            line(out, "FR", "BND", col);
            continue;
        }
        if (lo == -milp::kInf)
            line(out, "MI", "BND", col);
        else if (lo != 0.0)
            line(out, "LO", "BND", col, format_number(lo));
        if (up != milp::kInf)
            line(out, "UP", "BND", col, format_number(up));
        else if (v.is_integer())
            line(out, "PL", "BND", col);
    }
    out << "ENDATA\n";
}

void write_mps(const milp::MILPInstance& instance, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    std::string name = instance.meta.scenario.empty() ? "HUBOPT" : instance.meta.scenario;
    std::replace(name.begin(), name.end(), ' ', '_');
    write_mps(instance, out, name);
    if (!out)
        throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

namespace
{

std::vector<std::string> tokens(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string t;
    while (in >> t)
        out.push_back(t);
    return out;
}

} // namespace

MpsModel parse_mps(std::istream& in)
{
    enum class Section
    {
        None,
        Rows,
        Columns,
        Rhs,
        Ranges,
        Bounds,
        End,
    };
    MpsModel m;
    Section section = Section::None;
    std::string objective_row;
    std::unordered_map<std::string, int> row_index, col_index;
    std::vector<char> row_type;
    std::vector<double> rhs;
    std::vector<int> ri, ci;
    std::vector<double> vals;
    std::vector<double> cost;
    std::vector<double> lower, upper;
    std::vector<std::pair<int, double>> ranges;
    bool integer_block = false;
    int line_no = 0;
    std::string text;

    auto fail = [&](const std::string& what) -> void {
        throw Error(ErrorCode::ParseError, fmt::format("MPS line {}: {}", line_no, what));
    };
    auto number = [&](const std::string& s) {
        auto v = parse_number(s);
        if (!v)
            fail("bad number '" + s + "'");
        return *v;
    };
    auto row_of = [&](const std::string& name) -> int {
        if (name == objective_row)
            return -1;
        auto it = row_index.find(name);
        if (it == row_index.end())
            fail("unknown row " + name);
        return it->second;
    };
    auto col_of = [&](const std::string& name) -> int {
        auto it = col_index.find(name);
        if (it == col_index.end())
            fail("unknown column " + name);
        return it->second;
    };

    while (std::getline(in, text))
    {
        ++line_no;
        if (!text.empty() && text.back() == '\r')
            text.pop_back();
        if (text.empty() || text[0] == '*')
            continue;
        auto tok = tokens(text);
        if (tok.empty())
            continue;
        if (text[0] != ' ' && text[0] != '\t')
        {
            const auto& head = tok[0];
            if (head == "NAME")
                m.name = tok.size() > 1 ? tok[1] : "";
            else if (head == "ROWS")
                section = Section::Rows;
            else if (head == "COLUMNS")
                section = Section::Columns;
            else if (head == "RHS")
                section = Section::Rhs;
            else if (head == "RANGES")
                section = Section::Ranges;
            else if (head == "BOUNDS")
                section = Section::Bounds;
            else if (head == "ENDATA")
            {
                section = Section::End;
                break;
            }
            else
                fail("unknown section " + head);
            continue;
        }
        switch (section)
        {
        case Section::Rows: {
            if (tok.size() != 2)
                fail("ROWS entry needs type and name");
            char type = tok[0][0];
            if (type == 'N')
            {
                if (objective_row.empty())
                    objective_row = tok[1];
                continue;
            }
            if (type != 'L' && type != 'G' && type != 'E')
                fail("unknown row type " + tok[0]);
            row_index.emplace(tok[1], static_cast<int>(m.row_names.size()));
            m.row_names.push_back(tok[1]);
            row_type.push_back(type);
            rhs.push_back(0.0);
            break;
        }
        case Section::Columns: {
            if (tok.size() >= 3 && tok[1] == "'MARKER'")
            {
                if (tok[2] == "'INTORG'")
                    integer_block = true;
                else if (tok[2] == "'INTEND'")
                    integer_block = false;
                else
                    fail("unknown marker " + tok[2]);
                continue;
            }
            if (tok.size() != 3 && tok.size() != 5)
                fail("COLUMNS entry needs 3 or 5 fields");
            auto [it, added] = col_index.emplace(tok[0], static_cast<int>(m.column_names.size()));
            if (added)
            {
                m.column_names.push_back(tok[0]);
                cost.push_back(0.0);
                lower.push_back(0.0);
                upper.push_back(milp::kInf);
                m.domains.push_back(integer_block ? Domain::Integer : Domain::Continuous);
            }
            int j = it->second;
            for (std::size_t k = 1; k + 1 < tok.size(); k += 2)
            {
                int r = row_of(tok[k]);
                double v = number(tok[k + 1]);
                if (r < 0)
                    cost[static_cast<std::size_t>(j)] += v;
                else
                {
                    ri.push_back(r);
                    ci.push_back(j);
                    vals.push_back(v);
                }
            }
            break;
        }
        case Section::Rhs: {
            if (tok.size() != 3 && tok.size() != 5)
                fail("RHS entry needs 3 or 5 fields");
            for (std::size_t k = 1; k + 1 < tok.size(); k += 2)
            {
                int r = row_of(tok[k]);
                double v = number(tok[k + 1]);
                if (r < 0)
                    m.lp.offset = -v;
                else
                    rhs[static_cast<std::size_t>(r)] = v;
            }
            break;
        }
        case Section::Ranges: {
            if (tok.size() != 3 && tok.size() != 5)
                fail("RANGES entry needs 3 or 5 fields");
            for (std::size_t k = 1; k + 1 < tok.size(); k += 2)
            {
                int r = row_of(tok[k]);
                if (r < 0)
                    fail("range on objective row");
                ranges.emplace_back(r, number(tok[k + 1]));
            }
            break;
        }
        case Section::Bounds: {
            if (tok.size() < 3)
                fail("BOUNDS entry needs type, set and column");
            const auto& type = tok[0];
            auto j = static_cast<std::size_t>(col_of(tok[2]));
            auto value = [&] {
                if (tok.size() < 4)
                    fail(type + " bound needs a value");
                return number(tok[3]);
            };
            if (type == "UP")
                upper[j] = value();
            else if (type == "LO")
                lower[j] = value();
            else if (type == "FX")
                lower[j] = upper[j] = value();
            else if (type == "FR")
            {
                lower[j] = -milp::kInf;
                upper[j] = milp::kInf;
            }
            else if (type == "MI")
                lower[j] = -milp::kInf;
            else if (type == "PL")
                upper[j] = milp::kInf;
            else if (type == "BV")
            {
                lower[j] = 0.0;
                upper[j] = 1.0;
                m.domains[j] = Domain::Binary;
            }
            else if (type == "LI" || type == "UI")
            {
                (type == "LI" ? lower[j] : upper[j]) = value();
                if (m.domains[j] == Domain::Continuous)
                    m.domains[j] = Domain::Integer;
            }
            else
                fail("unknown bound type " + type);
            break;
        }
        case Section::None:
        case Section::End: fail("data outside a section");
        }
    }
    if (section != Section::End)
        throw Error(ErrorCode::ParseError, "MPS file has no ENDATA");

    int rows = static_cast<int>(m.row_names.size());
    int cols = static_cast<int>(m.column_names.size());
    auto& lp = m.lp;
    lp.a = csc_from_triplets(rows, cols, std::move(ri), std::move(ci), std::move(vals));
    lp.cost = std::move(cost);
    lp.col_lower = std::move(lower);
    lp.col_upper = std::move(upper);
    lp.row_lower.resize(static_cast<std::size_t>(rows));
    lp.row_upper.resize(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i)
    {
        auto u = static_cast<std::size_t>(i);
        switch (row_type[u])
        {
        case 'L': lp.row_lower[u] = -milp::kInf; lp.row_upper[u] = rhs[u]; break;
        case 'G': lp.row_lower[u] = rhs[u]; lp.row_upper[u] = milp::kInf; break;
        default: lp.row_lower[u] = lp.row_upper[u] = rhs[u]; break;
        }
    }
    for (auto [r, range] : ranges)
    {
        auto u = static_cast<std::size_t>(r);
        double a = std::abs(range);
        switch (row_type[u])
        {
        case 'L': lp.row_lower[u] = rhs[u] - a; break;
        case 'G': lp.row_upper[u] = rhs[u] + a; break;
        default:
            if (range >= 0)
                lp.row_upper[u] = rhs[u] + a;
            else
                lp.row_lower[u] = rhs[u] - a;
        }
    }
    lp.integer.resize(static_cast<std::size_t>(cols));
    for (int j = 0; j < cols; ++j)
        lp.integer[static_cast<std::size_t>(j)] = m.domains[static_cast<std::size_t>(j)] != Domain::Continuous;
    return m;
}

MpsModel read_mps(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    return parse_mps(in);
}

std::filesystem::path tags_path(const std::filesystem::path& mps)
{
    auto p = mps;
    p.replace_extension(".tags");
    return p;
}

void write_tags(const milp::MILPInstance& instance, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << "# mps-name name\n";
    for (std::size_t j = 0; j < instance.variables.size(); ++j)
        out << mps_column_name(static_cast<int>(j)) << ' ' << milp::variable_name(instance.variables[j].ref) << '\n';
    for (std::size_t i = 0; i < instance.constraints.size(); ++i)
        out << mps_row_name(static_cast<int>(i)) << ' ' << instance.constraints[i].tag << '\n';
    if (!out)
        throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

TagMap read_tags(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    TagMap map;
    std::string text;
    int line_no = 0;
    while (std::getline(in, text))
    {
        ++line_no;
        auto t = trim(text);
        if (t.empty() || t.front() == '#')
            continue;
        auto space = t.find(' ');
        if (space == std::string_view::npos)
            throw Error(ErrorCode::MalformedLine, fmt::format("{}:{}: expected '<mps-name> <name>'", path.string(), line_no));
        std::string key(t.substr(0, space));
        std::string value(trim(t.substr(space + 1)));
        auto& target = key.starts_with('C') ? map.columns : map.rows;
        if (!target.emplace(key, value).second)
            throw Error(ErrorCode::MalformedLine, fmt::format("{}:{}: {} listed twice", path.string(), line_no, key));
    }
    return map;
}

} // namespace hubopt::solver
