#pragma once

// Layered scenarios: each layer overrides (entity, parameter) values, and a
// stack applies its layers in order with the last writer winning.

#include "hubopt/model/entity_graph.hpp"
#include "hubopt/model/validate.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hubopt::scenario
{

using model::EntityGraph;
using model::EntityRef;
using model::Value;

using ParamKey = std::pair<EntityRef, std::string>;

struct ScenarioLayer
{
    std::string name;
    std::map<ParamKey, Value> overrides;
};

struct ScenarioStack
{
    std::string name;
    /// Lowest priority first.
    std::vector<std::string> layers;
};

/// Synthetic layer that scales MeOH and NH3 investment and FOM costs already in
/// effect beneath it. Not stored in the dataset.
inline constexpr std::string_view kOptimisticCapexLayer = "Opt-CAPEX";

struct ComposeOptions
{
    double capex_factor = 0.5;
};

/// Effective parameter set of one stack.
class EffectiveView
{
public:
    struct Entry
    {
        Value value;
        std::string layer;

        bool operator==(const Entry&) const = default;
    };

    const Value* find(const EntityRef& entity, std::string_view parameter) const;
    /// Layer that supplied the value, or nullptr.
    const std::string* source_layer(const EntityRef& entity, std::string_view parameter) const;
    bool contains(const EntityRef& entity, std::string_view parameter) const
    {
        return find(entity, parameter) != nullptr;
    }

    /// Constant value; series yield nullopt.
    std::optional<double> number(const EntityRef& entity, std::string_view parameter) const;
    /// Constant or series sampled at `t` (previous-value hold).
    std::optional<double> number_at(const EntityRef& entity, std::string_view parameter,
                                    Timestamp t) const;
    std::optional<bool> flag(const EntityRef& entity, std::string_view parameter) const;
    std::optional<std::string> text(const EntityRef& entity, std::string_view parameter) const;

    void apply(const ScenarioLayer& layer);
    void set(const EntityRef& entity, std::string parameter, Value value, std::string layer);

    const std::map<ParamKey, Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    bool operator==(const EffectiveView&) const = default;

private:
    std::map<ParamKey, Entry> entries_;
};

/// Extracts one declared layer from the graph. Throws Error{UndeclaredLayer}.
ScenarioLayer layer_of(const EntityGraph& graph, std::string_view name);

/// Applies layers in order; later layers win.
EffectiveView compose(std::span<const ScenarioLayer> layers);

/// Composes a stack against the graph. The synthetic optimistic-CAPEX layer is
/// accepted anywhere in the stack. Throws Error{UndeclaredLayer}.
EffectiveView compose(const EntityGraph& graph, const ScenarioStack& stack,
                      const ComposeOptions& options = {});

/// Stack rules: declared layers, no duplicates, `combine_with` partners present
/// earlier, `place_before` ordering honoured.
std::vector<model::Diagnostic> check_stack(const EntityGraph& graph, const ScenarioStack& stack);

/// S0..S11, S6-opt, S9-opt, a and b, in that order.
std::vector<ScenarioStack> builtin_scenarios();
std::optional<ScenarioStack> find_builtin(std::string_view name);

/// Multiplies every candidate_units and candidate_storages value c > 0 by
/// `factor`, rounding to the nearest integer and keeping at least one.
void scale_candidates(EffectiveView& view, double factor);

} // namespace hubopt::scenario
