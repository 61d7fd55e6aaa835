#include "hubopt/scenario/scenario.hpp"

#include "hubopt/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hubopt::scenario
{

namespace
{

template <typename Fn>
void for_each_owner(const EntityGraph& graph, Fn&& fn)
{
    for (const auto& [name, unit] : graph.units)
        fn(EntityRef{model::EntityClass::Unit, name}, unit.parameters);
    for (const auto& [name, node] : graph.nodes)
        fn(EntityRef{model::EntityClass::Node, name}, node.parameters);
    for (const auto& [name, group] : graph.groups)
        fn(EntityRef{model::EntityClass::Group, name}, group.parameters);
    for (const auto& [ref, rel] : graph.relationships)
        fn(ref, rel.parameters);
    for (const auto& [name, uc] : graph.user_constraints)
        fn(EntityRef{model::EntityClass::UserConstraint, name}, uc.parameters);
    for (const auto& [ref, member] : graph.user_constraint_members)
        fn(ref, member.parameters);
    for (const auto& [ref, obj] : graph.settings)
        fn(ref, obj.parameters);
}

bool is_p2x_unit(const std::string& name)
{
    return name.starts_with("MeOH") || name.starts_with("NH3");
}

void apply_optimistic_capex(EffectiveView& view, double factor)
{
    std::vector<std::pair<ParamKey, double>> scaled;
    for (const auto& [key, entry] : view.entries())
    {
        const auto& [ref, param] = key;
        if (ref.cls != model::EntityClass::Unit || !is_p2x_unit(ref.name))
            continue;
        if (param != "unit_investment_cost" && param != "fom_cost")
            continue;
        if (const auto* d = std::get_if<double>(&entry.value))
            scaled.emplace_back(key, *d * factor);
    }
    for (auto& [key, value] : scaled)
        view.set(key.first, key.second, value, std::string(kOptimisticCapexLayer));
}

} // namespace

const Value* EffectiveView::find(const EntityRef& entity, std::string_view parameter) const
{
    auto it = entries_.find(ParamKey{entity, std::string(parameter)});
    return it == entries_.end() ? nullptr : &it->second.value;
}

const std::string* EffectiveView::source_layer(const EntityRef& entity,
                                               std::string_view parameter) const
{
    auto it = entries_.find(ParamKey{entity, std::string(parameter)});
    return it == entries_.end() ? nullptr : &it->second.layer;
}

std::optional<double> EffectiveView::number(const EntityRef& entity,
                                            std::string_view parameter) const
{
    const Value* v = find(entity, parameter);
    if (const auto* d = v ? std::get_if<double>(v) : nullptr)
        return *d;
    return std::nullopt;
}

std::optional<double> EffectiveView::number_at(const EntityRef& entity, std::string_view parameter,
                                               Timestamp t) const
{
    const Value* v = find(entity, parameter);
    if (!v)
        return std::nullopt;
    if (const auto* d = std::get_if<double>(v))
        return *d;
    if (const auto* ts = std::get_if<model::TimeSeries>(v))
        return ts->sample(t);
    return std::nullopt;
}

std::optional<bool> EffectiveView::flag(const EntityRef& entity, std::string_view parameter) const
{
    const Value* v = find(entity, parameter);
    if (const auto* b = v ? std::get_if<bool>(v) : nullptr)
        return *b;
    return std::nullopt;
}

std::optional<std::string> EffectiveView::text(const EntityRef& entity,
                                               std::string_view parameter) const
{
    const Value* v = find(entity, parameter);
    if (const auto* s = v ? std::get_if<std::string>(v) : nullptr)
        return *s;
    return std::nullopt;
}

void EffectiveView::apply(const ScenarioLayer& layer)
{
    for (const auto& [key, value] : layer.overrides)
        entries_.insert_or_assign(key, Entry{value, layer.name});
}

void EffectiveView::set(const EntityRef& entity, std::string parameter, Value value,
                        std::string layer)
{
    entries_.insert_or_assign(ParamKey{entity, std::move(parameter)},
                              Entry{std::move(value), std::move(layer)});
}

ScenarioLayer layer_of(const EntityGraph& graph, std::string_view name)
{
    if (!graph.layers.contains(name))
        throw Error(ErrorCode::UndeclaredLayer, "layer '" + std::string(name) + "' is not declared");
    ScenarioLayer layer{std::string(name), {}};
    for_each_owner(graph, [&](const EntityRef& ref, const model::ParameterMap& params) {
        for (const auto& [param, values] : params)
            for (const auto& pv : values)
                if (pv.layer == name)
                    layer.overrides.emplace(ParamKey{ref, param}, pv.value);
    });
    return layer;
}

EffectiveView compose(std::span<const ScenarioLayer> layers)
{
    EffectiveView view;
    for (const auto& layer : layers)
        view.apply(layer);
    return view;
}

EffectiveView compose(const EntityGraph& graph, const ScenarioStack& stack,
                      const ComposeOptions& options)
{
    EffectiveView view;
    for (const auto& name : stack.layers)
    {
        if (name == kOptimisticCapexLayer && !graph.layers.contains(name))
            apply_optimistic_capex(view, options.capex_factor);
        else
            view.apply(layer_of(graph, name));
    }
    return view;
}

std::vector<model::Diagnostic> check_stack(const EntityGraph& graph, const ScenarioStack& stack)
{
    std::vector<model::Diagnostic> out;
    auto subject = "stack:" + stack.name;
    auto error = [&](std::string message) {
        out.push_back({model::Severity::Error, subject, std::move(message)});
    };
    std::map<std::string, std::size_t, std::less<>> position;
    for (std::size_t i = 0; i < stack.layers.size(); ++i)
    {
        const auto& name = stack.layers[i];
        if (!graph.layers.contains(name) && name != kOptimisticCapexLayer)
            error("layer " + name + " is not declared");
        if (!position.emplace(name, i).second)
            error("layer " + name + " appears twice");
    }
    for (const auto& [name, i] : position)
    {
        auto info = graph.layers.find(name);
        if (info == graph.layers.end())
            continue;
        for (const auto& partner : info->second.combine_with)
        {
            auto p = position.find(partner);
            if (p == position.end())
                error("layer " + name + " must be combined with " + partner);
            else if (p->second > i)
                error("layer " + name + " must come after " + partner);
        }
        for (const auto& later : info->second.place_before)
        {
            auto p = position.find(later);
            if (p != position.end() && p->second < i)
                error("layer " + name + " must be placed before " + later);
        }
    }
    return out;
}

std::vector<ScenarioStack> builtin_scenarios()
{
    // Column check-marks of the scenario matching table, in canonical layer order.
    struct Row
    {
        const char* layer;
        const char* marks; // one char per stack S0..S11, a, b
    };
    static constexpr Row kRows[] = {
        {"Base", "xxxxxxxxxxxxxx"},
        {"Inv", "xxxxxxxxxxxxxx"},
        {"Tech-H2-units", "xxxxxxxxxxxxxx"},
        {"Inv-H2-on", "xxxxxxxxxxxxxx"},
        {"Inv-H2-int", "xxxxxxxxxxxx.."},
        {"Inv-H2-cont", "............xx"},
        {"Inv-MeOH-on", "......xxx....."},
        {"Inv-MeOH-bin", "......xxx....."},
        {"Inv-MeOH-cont", ".............."},
        {"Inv-NH3-on", ".........xxx.."},
        {"Inv-NH3-bin", ".........xxx.."},
        {"Inv-NH3-cont", ".............."},
        {"Inv-PPA", "...xxxxxxxxx.."},
        {"Inv-storage-compress", "xxxxxxxxxxxxxx"},
        {"Mod-UC", "xxxxxxxxxxxxx."},
        {"Premium-1.5x", ".x..x..x..x..."},
        {"Premium-2x", "..x..x..x..x.."},
        {"Year", "xxxxxxxxxxxxxx"},
    };
    static constexpr const char* kNames[] = {"S0", "S1", "S2", "S3", "S4",  "S5", "S6",
                                             "S7", "S8", "S9", "S10", "S11", "a",  "b"};

    std::vector<ScenarioStack> stacks;
    for (std::size_t col = 0; col < std::size(kNames); ++col)
    {
        ScenarioStack stack{kNames[col], {}};
        for (const auto& row : kRows)
            if (row.marks[col] == 'x')
                stack.layers.emplace_back(row.layer);
        stacks.push_back(std::move(stack));
    }
    for (const char* base : {"S6", "S9"})
    {
        auto it = std::find_if(stacks.begin(), stacks.end(),
                               [&](const ScenarioStack& s) { return s.name == base; });
        ScenarioStack opt = *it;
        opt.name += "-opt";
        opt.layers.emplace_back(kOptimisticCapexLayer);
        stacks.insert(stacks.begin() + (std::string_view(base) == "S6" ? 12 : 13), opt);
    }
    return stacks;
}

std::optional<ScenarioStack> find_builtin(std::string_view name)
{
    for (auto& stack : builtin_scenarios())
        if (stack.name == name)
            return stack;
    return std::nullopt;
}

void scale_candidates(EffectiveView& view, double factor)
{
    std::vector<std::pair<ParamKey, double>> scaled;
    for (const auto& [key, entry] : view.entries())
    {
        if (key.second != "candidate_units" && key.second != "candidate_storages")
            continue;
        const auto* d = std::get_if<double>(&entry.value);
        if (d && *d > 0)
            scaled.emplace_back(key, std::max(1.0, std::round(*d * factor)));
    }
    for (auto& [key, value] : scaled)
    {
        auto layer = *view.source_layer(key.first, key.second);
        view.set(key.first, key.second, value, layer);
    }
}

} // namespace hubopt::scenario
