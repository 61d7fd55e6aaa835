#include "hubopt/model/entity_graph.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace hubopt::model
{

namespace
{

constexpr std::array<std::pair<EntityClass, std::string_view>, 11> kClassNames{{
    {EntityClass::Model, "model"},
    {EntityClass::TemporalBlock, "temporal_block"},
    {EntityClass::Scenario, "scenario"},
    {EntityClass::Unit, "unit"},
    {EntityClass::Node, "node"},
    {EntityClass::Group, "group"},
    {EntityClass::UnitFromNode, "unit__from_node"},
    {EntityClass::UnitToNode, "unit__to_node"},
    {EntityClass::UnitNodeNode, "unit__node__node"},
    {EntityClass::UserConstraint, "user_constraint"},
    {EntityClass::UserConstraintUnit, "user_constraint__unit"},
}};

} // namespace

std::string_view class_name(EntityClass cls)
{
    for (const auto& [c, name] : kClassNames)
        if (c == cls)
            return name;
    return "?";
}

std::optional<EntityClass> parse_class(std::string_view text)
{
    for (const auto& [c, name] : kClassNames)
        if (name == text)
            return c;
    return std::nullopt;
}

bool is_relationship(EntityClass cls)
{
    return cls == EntityClass::UnitFromNode || cls == EntityClass::UnitToNode ||
           cls == EntityClass::UnitNodeNode;
}

std::string to_string(const EntityRef& ref)
{
    return std::string(class_name(ref.cls)) + ":" + ref.name;
}

std::optional<double> TimeSeries::sample(Timestamp t) const
{
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin())
        return std::nullopt;
    return values[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
}

std::optional<double> TimeSeries::at_exactly(Timestamp t) const
{
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t)
        return std::nullopt;
    return values[static_cast<std::size_t>(std::distance(times.begin(), it))];
}

std::string describe(const Value& value)
{
    struct Visitor
    {
        std::string operator()(double v) const { return format_number(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(const TimeSeries& ts) const
        {
            return "time series (" + std::to_string(ts.times.size()) + " points" +
                   (ts.source.empty() ? std::string{} : ", " + ts.source) + ")";
        }
    };
    return std::visit(Visitor{}, value);
}

EntityRef Relationship::ref() const
{
    EntityClass cls = kind == RelationshipKind::UnitFromNode ? EntityClass::UnitFromNode
                      : kind == RelationshipKind::UnitToNode ? EntityClass::UnitToNode
                                                             : EntityClass::UnitNodeNode;
    std::string name = unit + "|" + node1;
    if (node2)
        name += "|" + *node2;
    return {cls, std::move(name)};
}

EntityRef UserConstraintMember::ref() const
{
    return {EntityClass::UserConstraintUnit, constraint + "|" + unit};
}

bool EntityGraph::empty() const
{
    return units.empty() && nodes.empty() && groups.empty() && relationships.empty() &&
           user_constraints.empty() && user_constraint_members.empty() && settings.empty() &&
           layers.empty();
}

const ParameterMap* EntityGraph::parameters(const EntityRef& ref) const
{
    switch (ref.cls)
    {
    case EntityClass::Unit:
        if (auto it = units.find(ref.name); it != units.end())
            return &it->second.parameters;
        return nullptr;
    case EntityClass::Node:
        if (auto it = nodes.find(ref.name); it != nodes.end())
            return &it->second.parameters;
        return nullptr;
    case EntityClass::Group:
        if (auto it = groups.find(ref.name); it != groups.end())
            return &it->second.parameters;
        return nullptr;
    case EntityClass::UnitFromNode:
    case EntityClass::UnitToNode:
    case EntityClass::UnitNodeNode:
        if (auto it = relationships.find(ref); it != relationships.end())
            return &it->second.parameters;
        return nullptr;
    case EntityClass::UserConstraint:
        if (auto it = user_constraints.find(ref.name); it != user_constraints.end())
            return &it->second.parameters;
        return nullptr;
    case EntityClass::UserConstraintUnit:
        if (auto it = user_constraint_members.find(ref); it != user_constraint_members.end())
            return &it->second.parameters;
        return nullptr;
    case EntityClass::Model:
    case EntityClass::TemporalBlock:
        if (auto it = settings.find(ref); it != settings.end())
            return &it->second.parameters;
        return nullptr;
    case EntityClass::Scenario:
        return nullptr;
    }
    return nullptr;
}

std::vector<std::string> EntityGraph::expand(std::string_view name) const
{
    if (auto it = groups.find(name); it != groups.end())
        return it->second.members;
    if (nodes.contains(name))
        return {std::string(name)};
    return {};
}

} // namespace hubopt::model
