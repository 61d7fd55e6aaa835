#include "hubopt/milp/compiler.hpp"

#include "hubopt/error.hpp"
#include "hubopt/milp/emitters.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hubopt::milp
{

using model::EntityClass;
using model::EntityRef;
using model::Relationship;
using model::RelationshipKind;

namespace
{

EntityRef unit_ref(const std::string& name)
{
    return {EntityClass::Unit, name};
}

EntityRef node_ref(const std::string& name)
{
    return {EntityClass::Node, name};
}

Domain parse_domain(const std::optional<std::string>& text)
{
    if (!text)
        return Domain::Continuous;
    if (text->ends_with("integer"))
        return Domain::Integer;
    if (text->ends_with("binary"))
        return Domain::Binary;
    return Domain::Continuous;
}

Sense parse_sense(const std::string& text, const std::string& subject)
{
    if (text == "<=")
        return Sense::LE;
    if (text == ">=")
        return Sense::GE;
    if (text == "==")
        return Sense::EQ;
    throw Error(ErrorCode::ParseError, subject + ": unknown sense '" + text + "'");
}

Direction endpoint_direction(const Relationship& rel)
{
    return rel.kind == RelationshipKind::UnitFromNode ? Direction::FromNode : Direction::ToNode;
}

std::string dir_label(Direction d)
{
    return d == Direction::FromNode ? "from" : "to";
}

} // namespace

std::string hour_tag(int h)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "h%04d", h);
    return buf;
}

TemporalBlocks derive_blocks(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                             std::optional<Duration> horizon)
{
    const model::SettingsObject* model_obj = nullptr;
    for (const auto& [ref, obj] : graph.settings)
        if (ref.cls == EntityClass::Model)
        {
            model_obj = &obj;
            break;
        }
    if (!model_obj)
        throw Error(ErrorCode::Unresolved, "dataset declares no model object");
    EntityRef mref{EntityClass::Model, model_obj->name};

    auto timestamp = [&](std::string_view param) {
        auto text = view.text(mref, param);
        if (!text)
            throw Error(ErrorCode::Unresolved, to_string(mref) + " " + std::string(param) + " is not set");
        auto t = parse_timestamp(*text);
        if (!t)
            throw Error(ErrorCode::ParseError, to_string(mref) + " " + std::string(param) +
                                                   " is not a timestamp: " + *text);
        return *t;
    };
    auto block_duration = [&](std::string_view block_param, std::string_view param) -> std::optional<Duration> {
        auto block = view.text(mref, block_param);
        if (!block)
            return std::nullopt;
        EntityRef bref{EntityClass::TemporalBlock, *block};
        auto text = view.text(bref, param);
        if (!text)
            return std::nullopt;
        auto d = parse_duration(*text);
        if (!d)
            throw Error(ErrorCode::ParseError, to_string(bref) + " " + std::string(param) +
                                                   " is not a duration: " + *text);
        return d;
    };

    TemporalBlocks blocks;
    blocks.start = timestamp("model_start");
    Timestamp end = horizon ? blocks.start + *horizon : timestamp("model_end");
    if (auto res = block_duration("operations_block", "resolution"))
        blocks.resolution = *res;
    if (auto res = block_duration("investment_block", "resolution"))
        blocks.investment_resolution = *res;
    if (blocks.resolution.count() <= 0)
        throw Error(ErrorCode::InvalidArgument, "operational resolution must be positive");
    if (end <= blocks.start)
        throw Error(ErrorCode::InvalidArgument, "model_end must follow model_start");
    auto span = end - blocks.start;
    if (span.count() % blocks.resolution.count() != 0)
        throw Error(ErrorCode::InvalidArgument, "horizon is not a whole number of operational steps");
    blocks.hours = static_cast<int>(span.count() / blocks.resolution.count());
    return blocks;
}

Compilation::Compilation(const model::EntityGraph& g, const scenario::EffectiveView& v,
                         TemporalBlocks b, CompileOptions o)
    : graph(g), view(v), blocks(b), options(std::move(o))
{
    auto& meta = instance.meta;
    meta.scenario = options.scenario;
    meta.mode = options.mode;
    meta.start = blocks.start;
    meta.resolution = blocks.resolution;
    meta.hours = blocks.hours;
    long long step = blocks.resolution.count();
    long long period_len = blocks.investment_resolution.count();
    int period_hours = period_len > 0 ? static_cast<int>(std::max(1LL, period_len / step)) : blocks.hours;
    if (period_hours <= 0)
        period_hours = 1;
    int periods = blocks.hours > 0 ? (blocks.hours + period_hours - 1) / period_hours : 1;
    meta.period_of_hour.resize(static_cast<std::size_t>(blocks.hours));
    for (int h = 0; h < blocks.hours; ++h)
        meta.period_of_hour[static_cast<std::size_t>(h)] = h / period_hours;
    double year_steps = static_cast<double>(blocks.cost_year.count()) / static_cast<double>(step);
    for (int p = 0; p < periods; ++p)
    {
        int inside = std::min(blocks.hours, (p + 1) * period_hours) - p * period_hours;
        meta.period_weight.push_back(static_cast<double>(inside) / year_steps);
    }
}

bool Compilation::unit_active(std::string_view unit) const
{
    if (!graph.units.contains(unit))
        return false;
    auto flag = view.flag(unit_ref(std::string(unit)), "is_active");
    return !flag || *flag;
}

const UnitPlan* Compilation::unit_plan(std::string_view unit) const
{
    for (const auto& u : units)
        if (u.name == unit)
            return &u;
    return nullptr;
}

const StoragePlan* Compilation::storage_plan(std::string_view node) const
{
    for (const auto& s : storages)
        if (s.node == node)
            return &s;
    return nullptr;
}

bool Compilation::uc_enabled(const UnitPlan& unit) const
{
    return options.mode == Mode::Milp && unit.online_integer;
}

std::vector<int> Compilation::flow_vars(const std::string& unit, const std::string& endpoint,
                                        Direction direction, int h) const
{
    std::vector<int> out;
    for (const auto& node : graph.expand(endpoint))
        if (auto id = instance.find({VarKind::UnitFlow, unit, node, direction, h}))
            out.push_back(*id);
    return out;
}

std::optional<double> Compilation::number_at(const EntityRef& ref, std::string_view param, int h) const
{
    const model::Value* v = view.find(ref, param);
    if (!v)
        return std::nullopt;
    auto value = view.number_at(ref, param, time_of(h));
    if (!value)
        throw Error(ErrorCode::Unresolved, to_string(ref) + " " + std::string(param) +
                                               " has no numeric value at " + format_timestamp(time_of(h)));
    return value;
}

void Compilation::add(std::vector<Term> terms, Sense sense, double rhs, std::string tag)
{
    instance.constraints.push_back({std::move(terms), sense, rhs, std::move(tag)});
}

void build_variables(Compilation& c)
{
    auto& inst = c.instance;
    const bool lp = c.options.mode == Mode::Lp;
    auto relax = [&](Domain d) { return lp ? Domain::Continuous : d; };

    // Units.
    for (const auto& [name, unit] : c.graph.units)
    {
        if (!c.unit_active(name))
            continue;
        UnitPlan plan;
        plan.name = name;
        auto ref = unit_ref(name);
        plan.candidates = c.view.number(ref, "candidate_units");
        plan.existing = c.view.number(ref, "number_of_units").value_or(plan.candidates ? 0.0 : 1.0);
        plan.investment_domain = relax(parse_domain(c.view.text(ref, "unit_investment_variable_type")));
        auto online = c.view.text(ref, "online_variable_type");
        plan.online_integer = !lp && parse_domain(online) != Domain::Continuous;
        if (auto d = c.view.text(ref, "min_down_time"))
        {
            auto dur = parse_duration(*d);
            if (!dur)
                throw Error(ErrorCode::ParseError, to_string(ref) + " min_down_time: " + *d);
            plan.min_down_hours = static_cast<int>(
                (dur->count() + c.blocks.resolution.count() - 1) / c.blocks.resolution.count());
        }
        plan.has_fix_on = c.view.contains(ref, "fix_units_on");

        std::set<std::pair<std::string, Direction>> flows;
        bool has_capacity = false;
        for (const auto& [rref, rel] : c.graph.relationships)
        {
            if (rel.unit != name)
                continue;
            plan.relationships.push_back(&rel);
            if (rel.kind == RelationshipKind::UnitNodeNode)
            {
                if (!rel.node2)
                    continue;
                bool in_out = c.view.contains(rref, "fix_ratio_in_out_unit_flow");
                bool out_out = c.view.contains(rref, "fix_ratio_out_out_unit_flow");
                if (!in_out && !out_out)
                    continue;
                for (const auto& n : c.graph.expand(rel.node1))
                    flows.emplace(n, in_out ? Direction::FromNode : Direction::ToNode);
                for (const auto& n : c.graph.expand(*rel.node2))
                    flows.emplace(n, Direction::ToNode);
                if (in_out && out_out)
                    for (const auto& n : c.graph.expand(rel.node1))
                        flows.emplace(n, Direction::ToNode);
                continue;
            }
            for (const auto& n : c.graph.expand(rel.node1))
                flows.emplace(n, endpoint_direction(rel));
            if (c.view.contains(rref, "unit_capacity"))
                has_capacity = true;
        }
        if (plan.candidates && *plan.candidates > 0 && !has_capacity)
            throw Error(ErrorCode::MissingCapacity,
                        "unit " + name + " has candidate units but no unit_capacity on any relationship");
        plan.flows.assign(flows.begin(), flows.end());
        c.units.push_back(std::move(plan));
    }

    for (const auto& u : c.units)
    {
        bool mothball = c.options.allow_mothballing ||
                        c.view.flag(unit_ref(u.name), "enable_mothballing").value_or(false);
        if (u.candidates)
        {
            double cand = std::max(0.0, *u.candidates);
            Domain d = u.investment_domain;
            if (d == Domain::Binary && cand > 1)
                d = Domain::Integer;
            for (int p = 0; p < c.periods(); ++p)
            {
                inst.add_variable({VarKind::UnitsInvested, u.name, {}, Direction::None, p}, d, 0.0, cand);
                inst.add_variable({VarKind::UnitsInvestedAvailable, u.name, {}, Direction::None, p}, d, 0.0, cand);
                inst.add_variable({VarKind::UnitsMothballed, u.name, {}, Direction::None, p}, d, 0.0,
                                  mothball ? cand : 0.0);
            }
        }
        double max_units = u.existing + (u.candidates ? std::max(0.0, *u.candidates) : 0.0);
        Domain on_domain = u.online_integer ? Domain::Integer : Domain::Continuous;
        for (int h = 0; h < c.hours(); ++h)
        {
            inst.add_variable({VarKind::UnitsAvailable, u.name, {}, Direction::None, h},
                              Domain::Continuous, 0.0, max_units);
            inst.add_variable({VarKind::UnitsOn, u.name, {}, Direction::None, h}, on_domain, 0.0,
                              on_domain == Domain::Integer ? std::floor(max_units) : max_units);
            if (c.uc_enabled(u))
            {
                inst.add_variable({VarKind::UnitsStarted, u.name, {}, Direction::None, h},
                                  Domain::Continuous, 0.0, max_units);
                inst.add_variable({VarKind::UnitsShutDown, u.name, {}, Direction::None, h},
                                  Domain::Continuous, 0.0, max_units);
            }
            for (const auto& [node, dir] : u.flows)
                inst.add_variable({VarKind::UnitFlow, u.name, node, dir, h}, Domain::Continuous);
        }
    }

    // Storages.
    for (const auto& [name, node] : c.graph.nodes)
    {
        auto ref = node_ref(name);
        if (!c.view.flag(ref, "has_state").value_or(false))
            continue;
        StoragePlan s;
        s.node = name;
        s.candidates = c.view.number(ref, "candidate_storages");
        s.existing = c.view.number(ref, "number_of_storages").value_or(s.candidates ? 0.0 : 1.0);
        s.investment_domain = relax(parse_domain(c.view.text(ref, "storage_investment_variable_type")));
        s.state_cap = c.view.number(ref, "node_state_cap");
        s.loss = c.view.number(ref, "frac_state_loss").value_or(0.0);
        s.cyclic = c.view.flag(ref, "cyclic_condition").value_or(false);
        Timestamp before = c.blocks.start - c.blocks.resolution;
        if (c.view.contains(ref, "fix_node_state"))
            s.initial = c.view.number_at(ref, "fix_node_state", before);
        if (!s.initial && !s.cyclic)
            throw Error(ErrorCode::UnpinnedState,
                        "storage node " + name + " has neither fix_node_state nor cyclic_condition");
        c.storages.push_back(std::move(s));
    }
    for (const auto& s : c.storages)
    {
        bool mothball = c.options.allow_mothballing ||
                        c.view.flag(node_ref(s.node), "enable_mothballing").value_or(false);
        if (s.candidates)
        {
            double cand = std::max(0.0, *s.candidates);
            Domain d = s.investment_domain;
            if (d == Domain::Binary && cand > 1)
                d = Domain::Integer;
            for (int p = 0; p < c.periods(); ++p)
            {
                inst.add_variable({VarKind::StoragesInvested, {}, s.node, Direction::None, p}, d, 0.0, cand);
                inst.add_variable({VarKind::StoragesInvestedAvailable, {}, s.node, Direction::None, p}, d, 0.0,
                                  cand);
                inst.add_variable({VarKind::StoragesMothballed, {}, s.node, Direction::None, p}, d, 0.0,
                                  mothball ? cand : 0.0);
            }
        }
        for (int h = -1; h < c.hours(); ++h)
            inst.add_variable({VarKind::NodeState, {}, s.node, Direction::None, h}, Domain::Continuous);
    }
}

void emit_investment_constraints(Compilation& c)
{
    auto& inst = c.instance;
    auto emit = [&](const std::string& label, VarKind invested, VarKind available, VarKind mothballed,
                    const std::string& unit, const std::string& node, double candidates) {
        for (int p = 0; p < c.periods(); ++p)
        {
            std::string period = "t" + hour_tag(p).substr(1);
            int avail = inst.at({available, unit, node, Direction::None, p});
            c.add({{avail, 1.0}}, Sense::LE, candidates, "Eq1:" + label + ":" + period);
            std::vector<Term> terms{{avail, 1.0},
                                    {inst.at({invested, unit, node, Direction::None, p}), -1.0},
                                    {inst.at({mothballed, unit, node, Direction::None, p}), 1.0}};
            if (p > 0)
                terms.push_back({inst.at({available, unit, node, Direction::None, p - 1}), -1.0});
            c.add(std::move(terms), Sense::EQ, 0.0, "Eq2:" + label + ":" + period);
        }
    };
    for (const auto& u : c.units)
        if (u.candidates)
            emit(u.name, VarKind::UnitsInvested, VarKind::UnitsInvestedAvailable, VarKind::UnitsMothballed,
                 u.name, {}, std::max(0.0, *u.candidates));
    for (const auto& s : c.storages)
        if (s.candidates)
            emit(s.node, VarKind::StoragesInvested, VarKind::StoragesInvestedAvailable,
                 VarKind::StoragesMothballed, {}, s.node, std::max(0.0, *s.candidates));
}

void emit_availability_constraints(Compilation& c)
{
    auto& inst = c.instance;
    for (const auto& u : c.units)
    {
        auto ref = unit_ref(u.name);
        for (int h = 0; h < c.hours(); ++h)
        {
            std::string hl = hour_tag(h);
            int avail = inst.at({VarKind::UnitsAvailable, u.name, {}, Direction::None, h});
            int on = inst.at({VarKind::UnitsOn, u.name, {}, Direction::None, h});
            double factor = c.number_at(ref, "unit_availability_factor", h).value_or(1.0);
            std::vector<Term> eq3{{avail, 1.0}};
            if (u.candidates)
                eq3.push_back({inst.at({VarKind::UnitsInvestedAvailable, u.name, {}, Direction::None,
                                        c.period_of(h)}),
                               -factor});
            c.add(std::move(eq3), Sense::LE, factor * u.existing, "Eq3:" + u.name + ":" + hl);
            c.add({{on, 1.0}, {avail, -1.0}}, Sense::LE, 0.0, "Eq4:" + u.name + ":" + hl);
            if (u.has_fix_on)
                if (auto fixed = c.number_at(ref, "fix_units_on", h))
                    c.add({{on, 1.0}}, Sense::EQ, *fixed, "fix_on:" + u.name + ":" + hl);
        }
    }
}

void emit_flow_constraints(Compilation& c)
{
    auto& inst = c.instance;
    for (const auto& u : c.units)
    {
        for (const auto* rel : u.relationships)
        {
            if (rel->kind == RelationshipKind::UnitNodeNode)
                continue;
            auto rref = rel->ref();
            auto cap = c.view.number(rref, "unit_capacity");
            if (!cap)
                continue;
            double minop = c.view.number(rref, "minimum_operating_point").value_or(0.0);
            Direction dir = endpoint_direction(*rel);
            std::string label = u.name + ":" + dir_label(dir) + ":" + rel->node1;
            for (int h = 0; h < c.hours(); ++h)
            {
                int on = inst.at({VarKind::UnitsOn, u.name, {}, Direction::None, h});
                std::vector<Term> flows;
                for (int v : c.flow_vars(u.name, rel->node1, dir, h))
                    flows.push_back({v, 1.0});
                if (flows.empty())
                    continue;
                auto upper = flows;
                upper.push_back({on, -*cap});
                c.add(std::move(upper), Sense::LE, 0.0, "Eq5:" + label + ":" + hour_tag(h));
                if (minop > 0)
                {
                    auto lower = flows;
                    lower.push_back({on, -minop * *cap});
                    c.add(std::move(lower), Sense::GE, 0.0, "minop:" + label + ":" + hour_tag(h));
                }
            }
        }
    }
}

void emit_ratio_constraints(Compilation& c)
{
    for (const auto& u : c.units)
    {
        for (const auto* rel : u.relationships)
        {
            if (rel->kind != RelationshipKind::UnitNodeNode || !rel->node2)
                continue;
            auto rref = rel->ref();
            struct Ratio
            {
                const char* param;
                const char* label;
                Direction first;
            };
            for (const Ratio& ratio : {Ratio{"fix_ratio_in_out_unit_flow", "in_out", Direction::FromNode},
                                       Ratio{"fix_ratio_out_out_unit_flow", "out_out", Direction::ToNode}})
            {
                auto r = c.view.number(rref, ratio.param);
                if (!r)
                    continue;
                std::string label = std::string(ratio.label) + ":" + u.name + ":" + rel->node1 + ":" + *rel->node2;
                for (int h = 0; h < c.hours(); ++h)
                {
                    std::vector<Term> terms;
                    // in_out: in(node1) = r * out(node2); out_out: out(node2) = r * out(node1).
                    if (ratio.first == Direction::FromNode)
                    {
                        for (int v : c.flow_vars(u.name, rel->node1, Direction::FromNode, h))
                            terms.push_back({v, 1.0});
                        for (int v : c.flow_vars(u.name, *rel->node2, Direction::ToNode, h))
                            terms.push_back({v, -*r});
                    }
                    else
                    {
                        for (int v : c.flow_vars(u.name, *rel->node2, Direction::ToNode, h))
                            terms.push_back({v, 1.0});
                        for (int v : c.flow_vars(u.name, rel->node1, Direction::ToNode, h))
                            terms.push_back({v, -*r});
                    }
                    c.add(std::move(terms), Sense::EQ, 0.0, label + ":" + hour_tag(h));
                }
            }
        }
    }
}

namespace
{

/// Flow variables entering (+1) and leaving (-1) each node at hour h.
std::map<std::string, std::vector<Term>> node_terms(const Compilation& c, int h)
{
    std::map<std::string, std::vector<Term>> terms;
    for (const auto& u : c.units)
        for (const auto& [node, dir] : u.flows)
        {
            int v = c.instance.at({VarKind::UnitFlow, u.name, node, dir, h});
            terms[node].push_back({v, dir == Direction::ToNode ? 1.0 : -1.0});
        }
    return terms;
}

} // namespace

void emit_nodal_balance(Compilation& c)
{
    std::vector<std::pair<std::string, Sense>> nodes;
    for (const auto& [name, node] : c.graph.nodes)
    {
        if (c.storage_plan(name))
            continue;
        auto sense = c.view.text(node_ref(name), "nodal_balance_sense");
        nodes.emplace_back(name, sense ? parse_sense(*sense, "node:" + name) : Sense::EQ);
    }
    for (int h = 0; h < c.hours(); ++h)
    {
        auto terms = node_terms(c, h);
        for (const auto& [name, sense] : nodes)
        {
            auto it = terms.find(name);
            if (it == terms.end() || it->second.empty())
                continue;
            c.add(std::move(it->second), sense, 0.0, "balance:" + name + ":" + hour_tag(h));
        }
    }
}

void emit_storage_constraints(Compilation& c)
{
    auto& inst = c.instance;
    for (const auto& s : c.storages)
    {
        auto state = [&](int h) { return inst.at({VarKind::NodeState, {}, s.node, Direction::None, h}); };
        for (int h = 0; h < c.hours(); ++h)
        {
            std::vector<Term> terms{{state(h), 1.0}, {state(h - 1), -(1.0 - s.loss)}};
            for (const auto& u : c.units)
                for (const auto& [node, dir] : u.flows)
                    if (node == s.node)
                        terms.push_back({inst.at({VarKind::UnitFlow, u.name, node, dir, h}),
                                         dir == Direction::ToNode ? -1.0 : 1.0});
            c.add(std::move(terms), Sense::EQ, 0.0, "state:" + s.node + ":" + hour_tag(h));
        }
        if (s.state_cap)
        {
            for (int h = -1; h < c.hours(); ++h)
            {
                std::vector<Term> terms{{state(h), 1.0}};
                if (s.candidates)
                    terms.push_back({inst.at({VarKind::StoragesInvestedAvailable, {}, s.node, Direction::None,
                                              h < 0 ? 0 : c.period_of(h)}),
                                     -*s.state_cap});
                c.add(std::move(terms), Sense::LE, *s.state_cap * s.existing,
                      "statecap:" + s.node + ":" + (h < 0 ? std::string("h-init") : hour_tag(h)));
            }
        }
        if (s.initial)
            c.add({{state(-1), 1.0}}, Sense::EQ, *s.initial, "fix_state:" + s.node);
        if (s.cyclic && c.hours() > 0)
            c.add({{state(c.hours() - 1), 1.0}, {state(-1), -1.0}}, Sense::EQ, 0.0, "cyclic:" + s.node);
    }
}

void emit_uc_constraints(Compilation& c)
{
    auto& inst = c.instance;
    for (const auto& u : c.units)
    {
        if (!c.uc_enabled(u))
            continue;
        auto var = [&](VarKind k, int h) { return inst.at({k, u.name, {}, Direction::None, h}); };
        for (int h = 0; h < c.hours(); ++h)
        {
            std::vector<Term> link{{var(VarKind::UnitsOn, h), 1.0},
                                   {var(VarKind::UnitsStarted, h), -1.0},
                                   {var(VarKind::UnitsShutDown, h), 1.0}};
            if (h > 0)
                link.push_back({var(VarKind::UnitsOn, h - 1), -1.0});
            c.add(std::move(link), Sense::EQ, 0.0, "uc_link:" + u.name + ":" + hour_tag(h));
        }
        if (u.min_down_hours < 1)
            continue;
        for (int h = 0; h < c.hours(); ++h)
        {
            std::vector<Term> terms{{var(VarKind::UnitsStarted, h), 1.0}};
            for (int k = std::max(0, h - u.min_down_hours + 1); k <= h; ++k)
                terms.push_back({var(VarKind::UnitsShutDown, k), 1.0});
            terms.push_back({var(VarKind::UnitsAvailable, h), -1.0});
            c.add(std::move(terms), Sense::LE, 0.0, "down_time:" + u.name + ":" + hour_tag(h));
        }
    }
}

void emit_user_constraints(Compilation& c)
{
    auto& inst = c.instance;
    for (const auto& [name, uc] : c.graph.user_constraints)
    {
        EntityRef ref{EntityClass::UserConstraint, name};
        auto sense_text = c.view.text(ref, "constraint_sense");
        auto rhs = c.view.number(ref, "right_hand_side");
        if (!sense_text || !rhs)
            continue;
        Sense sense = parse_sense(*sense_text, to_string(ref));
        std::vector<Term> terms;
        for (const auto& [mref, member] : c.graph.user_constraint_members)
        {
            if (member.constraint != name)
                continue;
            auto coeff = c.view.number(mref, "units_on_coefficient");
            if (!coeff || *coeff == 0.0)
                continue;
            if (!c.unit_plan(member.unit))
                throw Error(ErrorCode::UnknownMember,
                            "user_constraint " + name + " references inactive unit " + member.unit);
            for (int h = 0; h < c.hours(); ++h)
                terms.push_back({inst.at({VarKind::UnitsOn, member.unit, {}, Direction::None, h}), *coeff});
        }
        c.add(std::move(terms), sense, *rhs, "user:" + name);
    }
}

void build_objective(Compilation& c)
{
    auto& inst = c.instance;
    double total_weight = 0.0;
    for (double w : inst.meta.period_weight)
        total_weight += w;

    for (const auto& u : c.units)
    {
        auto ref = unit_ref(u.name);
        double inv_cost = c.view.number(ref, "unit_investment_cost").value_or(0.0);
        double fom = c.view.number(ref, "fom_cost").value_or(0.0);
        if (u.candidates)
            for (int p = 0; p < c.periods(); ++p)
            {
                double w = inst.meta.period_weight[static_cast<std::size_t>(p)];
                if (inv_cost != 0.0)
                    inst.objective.push_back(
                        {inst.at({VarKind::UnitsInvested, u.name, {}, Direction::None, p}), inv_cost * w});
                if (fom != 0.0)
                    inst.objective.push_back(
                        {inst.at({VarKind::UnitsInvestedAvailable, u.name, {}, Direction::None, p}), fom * w});
            }
        inst.objective_offset += fom * u.existing * total_weight;

        for (const auto* rel : u.relationships)
        {
            if (rel->kind == RelationshipKind::UnitNodeNode)
                continue;
            auto rref = rel->ref();
            if (!c.view.contains(rref, "fuel_cost"))
                continue;
            Direction dir = endpoint_direction(*rel);
            for (int h = 0; h < c.hours(); ++h)
            {
                double cost = *c.number_at(rref, "fuel_cost", h);
                if (cost == 0.0)
                    continue;
                for (int v : c.flow_vars(u.name, rel->node1, dir, h))
                    inst.objective.push_back({v, cost});
            }
        }
    }
    for (const auto& s : c.storages)
    {
        auto ref = node_ref(s.node);
        double inv_cost = c.view.number(ref, "storage_investment_cost").value_or(0.0);
        double fom = c.view.number(ref, "storage_fom_cost").value_or(0.0);
        if (s.candidates)
            for (int p = 0; p < c.periods(); ++p)
            {
                double w = inst.meta.period_weight[static_cast<std::size_t>(p)];
                if (inv_cost != 0.0)
                    inst.objective.push_back(
                        {inst.at({VarKind::StoragesInvested, {}, s.node, Direction::None, p}), inv_cost * w});
                if (fom != 0.0)
                    inst.objective.push_back(
                        {inst.at({VarKind::StoragesInvestedAvailable, {}, s.node, Direction::None, p}), fom * w});
            }
        inst.objective_offset += fom * s.existing * total_weight;
    }
}

MILPInstance compile(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                     const TemporalBlocks& blocks, const CompileOptions& options)
{
    Compilation c(graph, view, blocks, options);
    build_variables(c);
    emit_investment_constraints(c);
    emit_availability_constraints(c);
    emit_flow_constraints(c);
    emit_ratio_constraints(c);
    emit_nodal_balance(c);
    emit_storage_constraints(c);
    emit_uc_constraints(c);
    emit_user_constraints(c);
    build_objective(c);
    c.instance.normalize();
    // Rows that lost all terms are dropped when trivially satisfied; a violated
    // one is kept so the solver reports infeasibility.
    std::erase_if(c.instance.constraints, [](const LinearConstraint& lc) {
        return lc.terms.empty() && violation(lc, {}) == 0.0;
    });
    return std::move(c.instance);
}

} // namespace hubopt::milp
