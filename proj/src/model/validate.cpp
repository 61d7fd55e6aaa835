#include "hubopt/model/validate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <span>

namespace hubopt::model
{

namespace
{

enum class Domain
{
    NonNegative,  // number >= 0
    Positive,     // number > 0
    Fraction,     // 0 <= x <= 1
    LossFraction, // 0 <= x < 1
    Any,          // any number
    Flag,
    Sense,
    Duration,
    Timestamp,
    Text,
};

struct ParamSpec
{
    std::string_view name;
    Domain domain;
    bool series_allowed;
};

constexpr ParamSpec kUnitParams[] = {
    {"candidate_units", Domain::NonNegative, false},
    {"number_of_units", Domain::NonNegative, false},
    {"unit_availability_factor", Domain::Fraction, true},
    {"fix_units_on", Domain::NonNegative, true},
    {"unit_investment_cost", Domain::Any, false},
    {"unit_investment_variable_type", Domain::Text, false},
    {"fom_cost", Domain::Any, false},
    {"min_down_time", Domain::Duration, false},
    {"online_variable_type", Domain::Text, false},
    {"is_active", Domain::Flag, false},
    {"enable_mothballing", Domain::Flag, false},
};

constexpr ParamSpec kNodeParams[] = {
    {"nodal_balance_sense", Domain::Sense, false},
    {"has_state", Domain::Flag, false},
    {"node_state_cap", Domain::NonNegative, false},
    {"frac_state_loss", Domain::LossFraction, false},
    {"fix_node_state", Domain::NonNegative, true},
    {"cyclic_condition", Domain::Flag, false},
    {"candidate_storages", Domain::NonNegative, false},
    {"number_of_storages", Domain::NonNegative, false},
    {"storage_investment_cost", Domain::Any, false},
    {"storage_fom_cost", Domain::Any, false},
    {"storage_investment_variable_type", Domain::Text, false},
};

constexpr std::string_view kStateParams[] = {
    "node_state_cap",   "frac_state_loss",         "fix_node_state",
    "cyclic_condition", "candidate_storages",      "number_of_storages",
    "storage_investment_cost", "storage_fom_cost", "storage_investment_variable_type",
};

constexpr ParamSpec kRelationshipParams[] = {
    {"unit_capacity", Domain::NonNegative, false},
    {"fix_ratio_in_out_unit_flow", Domain::Positive, false},
    {"fix_ratio_out_out_unit_flow", Domain::Positive, false},
    {"fuel_cost", Domain::Any, true},
    {"minimum_operating_point", Domain::Fraction, false},
};

constexpr ParamSpec kUserConstraintParams[] = {
    {"constraint_sense", Domain::Sense, false},
    {"right_hand_side", Domain::Any, false},
};

constexpr ParamSpec kMemberParams[] = {
    {"units_on_coefficient", Domain::Any, false},
};

constexpr ParamSpec kModelParams[] = {
    {"model_start", Domain::Timestamp, false},
    {"model_end", Domain::Timestamp, false},
    {"duration_unit", Domain::Text, false},
    {"operations_block", Domain::Text, false},
    {"investment_block", Domain::Text, false},
    {"db_lp_solver", Domain::Text, false},
    {"db_mip_solver", Domain::Text, false},
};

constexpr ParamSpec kBlockParams[] = {
    {"resolution", Domain::Duration, false},
    {"block_start", Domain::Duration, false},
    {"block_end", Domain::Duration, false},
};

class Checker
{
public:
    explicit Checker(const EntityGraph& graph) : g_(graph) {}

    std::vector<Diagnostic> run()
    {
        names();
        for (const auto& [name, unit] : g_.units)
            check_unit(name, unit);
        for (const auto& [name, node] : g_.nodes)
            check_node(name, node);
        for (const auto& [name, group] : g_.groups)
            check_group(name, group);
        for (const auto& [ref, rel] : g_.relationships)
            check_relationship(ref, rel);
        for (const auto& [name, uc] : g_.user_constraints)
            check_params({EntityClass::UserConstraint, name}, uc.parameters, kUserConstraintParams);
        for (const auto& [ref, member] : g_.user_constraint_members)
            check_params(ref, member.parameters, kMemberParams);
        for (const auto& [ref, obj] : g_.settings)
            check_params(ref, obj.parameters,
                         ref.cls == EntityClass::Model ? std::span<const ParamSpec>(kModelParams)
                                                       : std::span<const ParamSpec>(kBlockParams));
        check_blocks();
        check_supply_paths();
        return std::move(out_);
    }

private:
    void error(const std::string& subject, std::string message)
    {
        out_.push_back({Severity::Error, subject, std::move(message)});
    }

    void warning(const std::string& subject, std::string message)
    {
        out_.push_back({Severity::Warning, subject, std::move(message)});
    }

    void names()
    {
        for (const auto& [name, group] : g_.groups)
            if (g_.nodes.contains(name))
                error("group:" + name, "name also used by a node");
    }

    static bool any_true(const ParameterMap& params, std::string_view name)
    {
        auto it = params.find(name);
        if (it == params.end())
            return false;
        return std::any_of(it->second.begin(), it->second.end(), [](const ParameterValue& pv) {
            auto* b = std::get_if<bool>(&pv.value);
            return b && *b;
        });
    }

    void check_value(const std::string& subject, const ParamSpec& spec, const ParameterValue& pv)
    {
        auto where = spec.name;
        auto bad = [&](const std::string& what) {
            error(subject, std::string(where) + " [" + pv.layer + "] " + what);
        };
        auto check_number = [&](double v) {
            switch (spec.domain)
            {
            case Domain::NonNegative:
                if (v < 0)
                    bad("must be >= 0");
                break;
            case Domain::Positive:
                if (!(v > 0))
                    bad("ratio must be > 0");
                break;
            case Domain::Fraction:
                if (v < 0 || v > 1)
                    bad("must lie in [0, 1]");
                break;
            case Domain::LossFraction:
                if (v < 0 || v >= 1)
                    bad("loss fraction out of range");
                break;
            default: break;
            }
        };

        if (const auto* ts = std::get_if<TimeSeries>(&pv.value))
        {
            if (!spec.series_allowed)
            {
                bad("cannot be a time series");
                return;
            }
            if (!std::is_sorted(ts->times.begin(), ts->times.end()) ||
                std::adjacent_find(ts->times.begin(), ts->times.end()) != ts->times.end())
                bad("series timestamps not strictly increasing");
            for (double v : ts->values)
                check_number(v);
            return;
        }
        switch (spec.domain)
        {
        case Domain::NonNegative:
        case Domain::Positive:
        case Domain::Fraction:
        case Domain::LossFraction:
        case Domain::Any:
            if (const auto* d = std::get_if<double>(&pv.value))
                check_number(*d);
            else
                bad("must be numeric");
            break;
        case Domain::Flag:
            if (!std::holds_alternative<bool>(pv.value))
                bad("must be true or false");
            break;
        case Domain::Sense: {
            const auto* s = std::get_if<std::string>(&pv.value);
            if (!s || (*s != "<=" && *s != ">=" && *s != "=="))
                bad("sense must be <=, >= or ==");
            break;
        }
        case Domain::Duration: {
            const auto* s = std::get_if<std::string>(&pv.value);
            if (!s || !parse_duration(*s))
                bad("must be a duration such as 1h or 364D");
            break;
        }
        case Domain::Timestamp: {
            const auto* s = std::get_if<std::string>(&pv.value);
            if (!s || !parse_timestamp(*s))
                bad("must be an ISO-8601 timestamp");
            break;
        }
        case Domain::Text:
            if (!std::holds_alternative<std::string>(pv.value))
                bad("must be text");
            break;
        }
    }

    void check_params(const EntityRef& ref, const ParameterMap& params,
                      std::span<const ParamSpec> specs)
    {
        auto subject = to_string(ref);
        for (const auto& [name, values] : params)
        {
            auto spec = std::find_if(specs.begin(), specs.end(),
                                     [&](const ParamSpec& s) { return s.name == name; });
            if (spec == specs.end())
            {
                warning(subject, "unknown parameter " + name + " is ignored");
                continue;
            }
            for (const auto& pv : values)
                check_value(subject, *spec, pv);
        }
    }

    static bool variable_type_ok(const ParameterValue& pv)
    {
        const auto* s = std::get_if<std::string>(&pv.value);
        return s && (s->ends_with("integer") || s->ends_with("continuous") ||
                     s->ends_with("binary") || s->ends_with("linear"));
    }

    void check_unit(const std::string& name, const Unit& unit)
    {
        EntityRef ref{EntityClass::Unit, name};
        check_params(ref, unit.parameters, kUnitParams);
        for (auto param : {"unit_investment_variable_type", "online_variable_type"})
            if (auto it = unit.parameters.find(param); it != unit.parameters.end())
                for (const auto& pv : it->second)
                    if (!variable_type_ok(pv))
                        error(to_string(ref), std::string(param) + " [" + pv.layer +
                                                  "] must name an integer, binary or continuous type");
        if (unit.parameters.contains("unit_investment_variable_type") &&
            !unit.parameters.contains("candidate_units"))
            error(to_string(ref), "unit_investment_variable_type set but candidate_units is missing");
    }

    void check_node(const std::string& name, const Node& node)
    {
        EntityRef ref{EntityClass::Node, name};
        check_params(ref, node.parameters, kNodeParams);
        if (auto it = node.parameters.find("storage_investment_variable_type");
            it != node.parameters.end())
            for (const auto& pv : it->second)
                if (!variable_type_ok(pv))
                    error(to_string(ref), "storage_investment_variable_type [" + pv.layer +
                                              "] must name an integer or continuous type");
        if (!any_true(node.parameters, "has_state"))
        {
            for (auto param : kStateParams)
                if (node.parameters.contains(param))
                    error(to_string(ref), std::string(param) + " set on a node without has_state");
            return;
        }
        bool charged = false;
        bool discharged = false;
        for (const auto& [r, rel] : g_.relationships)
        {
            auto touches = [&](const std::string& endpoint) {
                auto members = g_.expand(endpoint);
                return std::find(members.begin(), members.end(), name) != members.end();
            };
            if (rel.kind == RelationshipKind::UnitToNode && touches(rel.node1))
                charged = true;
            if (rel.kind == RelationshipKind::UnitFromNode && touches(rel.node1))
                discharged = true;
            // Ratio relationships: node2 is always an output, node1 an input for in/out ratios.
            if (rel.kind == RelationshipKind::UnitNodeNode)
            {
                if (rel.node2 && touches(*rel.node2))
                    charged = true;
                if (touches(rel.node1))
                {
                    if (rel.parameters.contains("fix_ratio_in_out_unit_flow"))
                        discharged = true;
                    if (rel.parameters.contains("fix_ratio_out_out_unit_flow"))
                        charged = true;
                }
            }
        }
        if (!charged)
            error(to_string(ref), "storage node has no charging relationship");
        if (!discharged)
            error(to_string(ref), "storage node has no discharging relationship");
    }

    void check_group(const std::string& name, const Group& group)
    {
        EntityRef ref{EntityClass::Group, name};
        if (group.members.empty())
            error(to_string(ref), "group has no members");
        for (const auto& [param, values] : group.parameters)
            error(to_string(ref), "groups cannot carry parameters (" + param + ")");
    }

    void check_relationship(const EntityRef& ref, const Relationship& rel)
    {
        check_params(ref, rel.parameters, kRelationshipParams);
        bool needs_node2 = rel.kind == RelationshipKind::UnitNodeNode;
        if (needs_node2 != rel.node2.has_value())
            error(to_string(ref), needs_node2 ? "unit__node__node requires a second node"
                                              : "only unit__node__node takes a second node");
        if (rel.kind == RelationshipKind::UnitNodeNode)
        {
            for (const auto& [param, values] : rel.parameters)
                if (param != "fix_ratio_in_out_unit_flow" && param != "fix_ratio_out_out_unit_flow")
                    error(to_string(ref), param + " is not a unit__node__node parameter");
        }
        else
        {
            for (const auto& [param, values] : rel.parameters)
                if (param.starts_with("fix_ratio_"))
                    error(to_string(ref), param + " belongs on a unit__node__node relationship");
        }
    }

    void check_blocks()
    {
        for (const auto& [ref, obj] : g_.settings)
        {
            if (ref.cls != EntityClass::Model)
                continue;
            auto texts = [&](std::string_view param) {
                std::vector<std::string> v;
                if (auto it = obj.parameters.find(param); it != obj.parameters.end())
                    for (const auto& pv : it->second)
                        if (const auto* s = std::get_if<std::string>(&pv.value))
                            v.push_back(*s);
                return v;
            };
            std::vector<Timestamp> starts, ends;
            for (const auto& s : texts("model_start"))
                if (auto t = parse_timestamp(s))
                    starts.push_back(*t);
            for (const auto& s : texts("model_end"))
                if (auto t = parse_timestamp(s))
                    ends.push_back(*t);
            std::vector<Duration> resolutions;
            for (const auto& block : texts("operations_block"))
            {
                EntityRef bref{EntityClass::TemporalBlock, block};
                auto it = g_.settings.find(bref);
                if (it == g_.settings.end())
                {
                    error(to_string(ref), "operations_block names undeclared temporal_block " + block);
                    continue;
                }
                if (auto r = it->second.parameters.find("resolution"); r != it->second.parameters.end())
                    for (const auto& pv : r->second)
                        if (const auto* s = std::get_if<std::string>(&pv.value))
                            if (auto d = parse_duration(*s))
                                resolutions.push_back(*d);
            }
            for (const auto& block : texts("investment_block"))
                if (!g_.settings.contains({EntityClass::TemporalBlock, block}))
                    error(to_string(ref), "investment_block names undeclared temporal_block " + block);
            for (auto start : starts)
                for (auto end : ends)
                {
                    if (!(start < end))
                    {
                        error(to_string(ref), "model_start must precede model_end");
                        continue;
                    }
                    for (auto res : resolutions)
                        if (res.count() <= 0 || (end - start).count() % res.count() != 0)
                            error(to_string(ref),
                                  "horizon is not a whole number of operational steps");
                }
        }
    }

    static bool is_source(const Node& node)
    {
        auto it = node.parameters.find("nodal_balance_sense");
        if (it == node.parameters.end())
            return false;
        return std::any_of(it->second.begin(), it->second.end(), [](const ParameterValue& pv) {
            auto* s = std::get_if<std::string>(&pv.value);
            return s && *s == "<=";
        });
    }

    // A unit is supplied when all of its energy can be traced back to a source
    // node or to a unit with no inputs at all (a generator).
    void check_supply_paths()
    {
        std::map<std::string, std::vector<std::string>, std::less<>> inputs;  // unit -> input nodes
        std::map<std::string, std::vector<std::string>, std::less<>> feeders; // node -> units
        for (const auto& [ref, rel] : g_.relationships)
        {
            if (rel.kind == RelationshipKind::UnitFromNode)
                for (const auto& n : g_.expand(rel.node1))
                    inputs[rel.unit].push_back(n);
            if (rel.kind == RelationshipKind::UnitToNode)
                for (const auto& n : g_.expand(rel.node1))
                    feeders[n].push_back(rel.unit);
        }

        std::set<std::string, std::less<>> supplied_nodes;
        std::set<std::string, std::less<>> supplied_units;
        for (const auto& [name, node] : g_.nodes)
            if (is_source(node))
                supplied_nodes.insert(name);
        bool changed = true;
        while (changed)
        {
            changed = false;
            for (const auto& [name, unit] : g_.units)
            {
                if (supplied_units.contains(name))
                    continue;
                auto it = inputs.find(name);
                bool ok = it == inputs.end() ||
                          std::any_of(it->second.begin(), it->second.end(),
                                      [&](const std::string& n) { return supplied_nodes.contains(n); });
                if (ok)
                {
                    supplied_units.insert(name);
                    changed = true;
                    for (const auto& [node, units] : feeders)
                        if (std::find(units.begin(), units.end(), name) != units.end())
                            supplied_nodes.insert(node);
                }
            }
        }

        for (const auto& [ref, rel] : g_.relationships)
        {
            if (rel.kind != RelationshipKind::UnitToNode)
                continue;
            auto it = rel.parameters.find("fuel_cost");
            if (it == rel.parameters.end())
                continue;
            bool revenue = std::any_of(it->second.begin(), it->second.end(), [](const auto& pv) {
                auto* d = std::get_if<double>(&pv.value);
                return d && *d < 0;
            });
            if (revenue && !supplied_units.contains(rel.unit))
                error("unit:" + rel.unit, "earns fuel revenue but has no supply path from a source");
        }
    }

    const EntityGraph& g_;
    std::vector<Diagnostic> out_;
};

} // namespace

std::string to_string(const Diagnostic& d)
{
    return std::string(d.severity == Severity::Error ? "error" : "warning") + ": " + d.subject +
           ": " + d.message;
}

std::vector<Diagnostic> validate_graph(const EntityGraph& graph)
{
    return Checker(graph).run();
}

bool has_errors(const std::vector<Diagnostic>& diagnostics)
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

} // namespace hubopt::model
