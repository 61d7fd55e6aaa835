#pragma once

// Individual constraint emitters. compile() runs them in the order declared
// here; they are exposed so fixtures can exercise one family at a time.

#include "hubopt/milp/compiler.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hubopt::milp
{

struct FlowEndpoint
{
    /// Node or group name as written on the relationship.
    std::string endpoint;
    Direction direction = Direction::ToNode;
    /// Concrete member nodes.
    std::vector<std::string> nodes;
};

struct UnitPlan
{
    std::string name;
    double existing = 0.0;
    std::optional<double> candidates;
    Domain investment_domain = Domain::Continuous;
    bool online_integer = false;
    int min_down_hours = 0;
    bool has_fix_on = false;
    /// Concrete (node, direction) pairs that get a unit_flow variable, sorted.
    std::vector<std::pair<std::string, Direction>> flows;
    /// Relationships of the unit (from/to/node-node), sorted by ref.
    std::vector<const model::Relationship*> relationships;
};

struct StoragePlan
{
    std::string node;
    double existing = 0.0;
    std::optional<double> candidates;
    Domain investment_domain = Domain::Continuous;
    std::optional<double> state_cap;
    double loss = 0.0;
    std::optional<double> initial;
    bool cyclic = false;
};

class Compilation
{
public:
    Compilation(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                TemporalBlocks blocks, CompileOptions options);

    const model::EntityGraph& graph;
    const scenario::EffectiveView& view;
    TemporalBlocks blocks;
    CompileOptions options;
    MILPInstance instance;

    std::vector<UnitPlan> units;
    std::vector<StoragePlan> storages;

    int hours() const { return blocks.hours; }
    int periods() const { return static_cast<int>(instance.meta.period_weight.size()); }
    int period_of(int h) const { return instance.meta.period_of_hour[static_cast<std::size_t>(h)]; }
    Timestamp time_of(int h) const { return instance.hour_start(h); }

    bool unit_active(std::string_view unit) const;
    const UnitPlan* unit_plan(std::string_view unit) const;
    const StoragePlan* storage_plan(std::string_view node) const;
    bool uc_enabled(const UnitPlan& unit) const;

    /// unit_flow variables of `unit` at the members of `endpoint` in `direction`.
    std::vector<int> flow_vars(const std::string& unit, const std::string& endpoint,
                               Direction direction, int h) const;

    /// Numeric parameter at hour h; throws Error{Unresolved} for a series gap.
    std::optional<double> number_at(const model::EntityRef& ref, std::string_view param, int h) const;

    void add(std::vector<Term> terms, Sense sense, double rhs, std::string tag);
};

/// Resolves unit and storage plans and creates every variable.
void build_variables(Compilation& c);
/// Eq1 and Eq2 for units and storages.
void emit_investment_constraints(Compilation& c);
/// Eq3, Eq4 and fix_units_on.
void emit_availability_constraints(Compilation& c);
/// Eq5 and minimum operating point.
void emit_flow_constraints(Compilation& c);
void emit_ratio_constraints(Compilation& c);
void emit_nodal_balance(Compilation& c);
void emit_storage_constraints(Compilation& c);
void emit_uc_constraints(Compilation& c);
void emit_user_constraints(Compilation& c);
void build_objective(Compilation& c);

/// Hour label used in tags, e.g. `h0017`.
std::string hour_tag(int h);

} // namespace hubopt::milp
