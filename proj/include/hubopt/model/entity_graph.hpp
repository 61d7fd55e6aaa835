#pragma once

// Entity graph of an energy hub: units, nodes, groups, their relationships and
// the scenario-tagged parameter values attached to each of them.

#include "hubopt/text.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hubopt::model
{

enum class EntityClass
{
    Model,
    TemporalBlock,
    Scenario,
    Unit,
    Node,
    Group,
    UnitFromNode,
    UnitToNode,
    UnitNodeNode,
    UserConstraint,
    UserConstraintUnit,
};

std::string_view class_name(EntityClass cls);
std::optional<EntityClass> parse_class(std::string_view text);
bool is_relationship(EntityClass cls);

/// Identifies any parameter owner. Relationship names join their members with `|`.
struct EntityRef
{
    EntityClass cls = EntityClass::Unit;
    std::string name;

    auto operator<=>(const EntityRef&) const = default;
};

std::string to_string(const EntityRef& ref);

/// Hourly (or arbitrary) series sampled by previous-value hold.
struct TimeSeries
{
    std::vector<Timestamp> times;
    std::vector<double> values;
    /// File the series came from; empty when it was built from timed rows.
    std::string source;

    /// Value in force at `t`, or nullopt when `t` precedes the first point.
    std::optional<double> sample(Timestamp t) const;
    /// True only for an exact timestamp match.
    std::optional<double> at_exactly(Timestamp t) const;

    bool operator==(const TimeSeries&) const = default;
};

/// Constant, TimeSeries, Flag, or Enum (free text such as `==` or `2h`).
using Value = std::variant<double, TimeSeries, bool, std::string>;

std::string describe(const Value& value);

struct ParameterValue
{
    Value value;
    std::string layer;

    bool operator==(const ParameterValue&) const = default;
};

/// parameter name -> values, one per scenario layer, kept sorted by layer name.
using ParameterMap = std::map<std::string, std::vector<ParameterValue>, std::less<>>;

struct Unit
{
    std::string name;
    ParameterMap parameters;

    bool operator==(const Unit&) const = default;
};

struct Node
{
    std::string name;
    ParameterMap parameters;

    bool operator==(const Node&) const = default;
};

struct Group
{
    std::string name;
    std::vector<std::string> members;
    /// Groups cannot carry parameters; anything stored here is reported by the validator.
    ParameterMap parameters;

    bool operator==(const Group&) const = default;
};

enum class RelationshipKind
{
    UnitFromNode,
    UnitToNode,
    UnitNodeNode,
};

struct Relationship
{
    RelationshipKind kind = RelationshipKind::UnitToNode;
    std::string unit;
    std::string node1;
    std::optional<std::string> node2;
    ParameterMap parameters;

    EntityRef ref() const;
    bool operator==(const Relationship&) const = default;
};

struct UserConstraint
{
    std::string name;
    ParameterMap parameters;

    bool operator==(const UserConstraint&) const = default;
};

struct UserConstraintMember
{
    std::string constraint;
    std::string unit;
    ParameterMap parameters;

    EntityRef ref() const;
    bool operator==(const UserConstraintMember&) const = default;
};

/// `model` and `temporal_block` objects.
struct SettingsObject
{
    EntityClass cls = EntityClass::Model;
    std::string name;
    ParameterMap parameters;

    bool operator==(const SettingsObject&) const = default;
};

/// Declared scenario layer with its stacking rules.
struct LayerInfo
{
    std::string name;
    /// Layers that must precede this one in any stack using it.
    std::vector<std::string> combine_with;
    /// Layers that, when present, must come after this one.
    std::vector<std::string> place_before;

    bool operator==(const LayerInfo&) const = default;
};

/// Immutable after loading; safe to share read-only across threads.
struct EntityGraph
{
    std::map<std::string, Unit, std::less<>> units;
    std::map<std::string, Node, std::less<>> nodes;
    std::map<std::string, Group, std::less<>> groups;
    std::map<EntityRef, Relationship> relationships;
    std::map<std::string, UserConstraint, std::less<>> user_constraints;
    std::map<EntityRef, UserConstraintMember> user_constraint_members;
    std::map<EntityRef, SettingsObject> settings;
    std::map<std::string, LayerInfo, std::less<>> layers;

    bool empty() const;
    const ParameterMap* parameters(const EntityRef& ref) const;

    bool is_node(std::string_view name) const { return nodes.contains(name); }
    bool is_group(std::string_view name) const { return groups.contains(name); }
    /// A node expands to itself, a group to its members; unknown names expand to nothing.
    std::vector<std::string> expand(std::string_view name) const;

    bool operator==(const EntityGraph&) const = default;
};

} // namespace hubopt::model
