#include "hubopt/milp/instance.hpp"

#include "hubopt/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hubopt::milp
{

namespace
{

constexpr std::array<std::pair<VarKind, std::string_view>, 12> kKindNames{{
    {VarKind::UnitFlow, "unit_flow"},
    {VarKind::UnitsOn, "units_on"},
    {VarKind::UnitsAvailable, "units_available"},
    {VarKind::UnitsStarted, "units_started"},
    {VarKind::UnitsShutDown, "units_shut_down"},
    {VarKind::UnitsInvested, "units_invested"},
    {VarKind::UnitsInvestedAvailable, "units_invested_available"},
    {VarKind::UnitsMothballed, "units_mothballed"},
    {VarKind::NodeState, "node_state"},
    {VarKind::StoragesInvested, "storages_invested"},
    {VarKind::StoragesInvestedAvailable, "storages_invested_available"},
    {VarKind::StoragesMothballed, "storages_mothballed"},
}};

bool is_investment(VarKind kind)
{
    switch (kind)
    {
    case VarKind::UnitsInvested:
    case VarKind::UnitsInvestedAvailable:
    case VarKind::UnitsMothballed:
    case VarKind::StoragesInvested:
    case VarKind::StoragesInvestedAvailable:
    case VarKind::StoragesMothballed: return true;
    default: return false;
    }
}

bool is_storage(VarKind kind)
{
    return kind == VarKind::NodeState || kind == VarKind::StoragesInvested ||
           kind == VarKind::StoragesInvestedAvailable || kind == VarKind::StoragesMothballed;
}

std::string time_label(VarKind kind, int time)
{
    char buf[16];
    if (time < 0)
        return is_investment(kind) ? "t-init" : "h-init";
    std::snprintf(buf, sizeof buf, "%c%04d", is_investment(kind) ? 't' : 'h', time);
    return buf;
}

} // namespace

std::string_view to_string(VarKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "?";
}

std::string_view to_string(Sense sense)
{
    switch (sense)
    {
    case Sense::LE: return "<=";
    case Sense::GE: return ">=";
    case Sense::EQ: return "==";
    }
    return "?";
}

std::string variable_name(const VariableRef& ref)
{
    std::string name(to_string(ref.kind));
    if (ref.kind == VarKind::UnitFlow)
    {
        if (ref.direction == Direction::FromNode)
            name += "." + ref.node + "." + ref.unit;
        else
            name += "." + ref.unit + "." + ref.node;
    }
    else if (is_storage(ref.kind))
        name += "." + ref.node;
    else
        name += "." + ref.unit;
    return name + "." + time_label(ref.kind, ref.time);
}

int MILPInstance::add_variable(const VariableRef& ref, Domain domain, double lower, double upper)
{
    int id = static_cast<int>(variables.size());
    if (!index_.emplace(ref, id).second)
        throw Error(ErrorCode::InvalidArgument, "duplicate variable " + variable_name(ref));
    variables.push_back({ref, domain, lower, upper});
    return id;
}

std::optional<int> MILPInstance::find(const VariableRef& ref) const
{
    auto it = index_.find(ref);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

int MILPInstance::at(const VariableRef& ref) const
{
    auto id = find(ref);
    if (!id)
        throw Error(ErrorCode::UnknownVariable, variable_name(ref));
    return *id;
}

namespace
{

void merge_terms(std::vector<Term>& terms)
{
    std::stable_sort(terms.begin(), terms.end(),
                     [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const auto& t : terms)
    {
        if (!merged.empty() && merged.back().var == t.var)
            merged.back().coeff += t.coeff;
        else
            merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
    terms = std::move(merged);
}

} // namespace

void MILPInstance::normalize()
{
    for (auto& c : constraints)
        merge_terms(c.terms);
    merge_terms(objective);
}

std::size_t MILPInstance::integer_count() const
{
    return static_cast<std::size_t>(
        std::count_if(variables.begin(), variables.end(), [](const Variable& v) { return v.is_integer(); }));
}

std::size_t MILPInstance::nonzero_count() const
{
    std::size_t n = 0;
    for (const auto& c : constraints)
        n += c.terms.size();
    return n;
}

double evaluate_objective(const MILPInstance& instance, const std::vector<double>& values)
{
    double z = instance.objective_offset;
    for (const auto& t : instance.objective)
        z += t.coeff * values[static_cast<std::size_t>(t.var)];
    return z;
}

double activity(const LinearConstraint& c, const std::vector<double>& values)
{
    double lhs = 0.0;
    for (const auto& t : c.terms)
        lhs += t.coeff * values[static_cast<std::size_t>(t.var)];
    return lhs;
}

double violation(const LinearConstraint& c, const std::vector<double>& values)
{
    double lhs = activity(c, values);
    switch (c.sense)
    {
    case Sense::LE: return std::max(0.0, lhs - c.rhs);
    case Sense::GE: return std::max(0.0, c.rhs - lhs);
    case Sense::EQ: return std::abs(lhs - c.rhs);
    }
    return 0.0;
}

AuditReport audit(const MILPInstance& instance, const std::vector<double>& values, double tolerance,
                  double integrality_tolerance)
{
    AuditReport report;
    auto note = [&](double residual, const auto& what) {
        if (!(residual <= tolerance))
        {
            ++report.violations;
            report.ok = false;
        }
        if (!(residual <= report.max_residual))
        {
            report.max_residual = residual;
            report.worst = what();
        }
    };
    if (values.size() != instance.variables.size())
    {
        report.ok = false;
        report.max_residual = kInf;
        report.worst = "value count mismatch";
        return report;
    }
    for (std::size_t j = 0; j < instance.variables.size(); ++j)
    {
        const auto& v = instance.variables[j];
        double x = values[j];
        if (!std::isfinite(x))
        {
            note(kInf, [&] { return "undefined:" + variable_name(v.ref); });
            continue;
        }
        double r = std::max({0.0, v.lower - x, x - v.upper});
        note(r, [&] { return "bound:" + variable_name(v.ref); });
        if (v.is_integer())
        {
            double f = std::abs(x - std::round(x));
            if (f > integrality_tolerance)
            {
                ++report.violations;
                report.ok = false;
                if (f > report.max_residual)
                {
                    report.max_residual = f;
                    report.worst = "integrality:" + variable_name(v.ref);
                }
            }
        }
    }
    for (const auto& c : instance.constraints)
        note(violation(c, values), [&] { return c.tag; });
    return report;
}

} // namespace hubopt::milp
