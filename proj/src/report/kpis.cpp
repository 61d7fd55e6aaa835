#include "hubopt/report/kpis.hpp"

#include "hubopt/error.hpp"
#include "hubopt/milp/emitters.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace hubopt::report
{

using milp::Direction;
using milp::VarKind;
using model::EntityClass;
using model::RelationshipKind;

namespace
{

class Values
{
public:
    Values(const milp::MILPInstance& instance, const solver::Solution& solution)
        : instance_(instance), solution_(solution)
    {
    }

    double of(int var) const
    {
        double v = solution_.values[static_cast<std::size_t>(var)];
        if (std::isnan(v))
            throw Error(ErrorCode::MissingSolutionValue,
                        milp::variable_name(instance_.variables[static_cast<std::size_t>(var)].ref));
        return v;
    }

    double of(const milp::VariableRef& ref) const
    {
        auto j = instance_.find(ref);
        return j ? of(*j) : 0.0;
    }

private:
    const milp::MILPInstance& instance_;
    const solver::Solution& solution_;
};

// Plans exactly as the compiler resolved them.
milp::Compilation plans(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                        const milp::MILPInstance& instance)
{
    milp::TemporalBlocks blocks;
    blocks.start = instance.meta.start;
    blocks.resolution = instance.meta.resolution;
    blocks.hours = instance.meta.hours;
    milp::CompileOptions options;
    options.mode = instance.meta.mode;
    options.scenario = instance.meta.scenario;
    milp::Compilation c(graph, view, blocks, options);
    milp::build_variables(c);
    return c;
}

Direction direction_of(const model::Relationship& rel)
{
    return rel.kind == RelationshipKind::UnitFromNode ? Direction::FromNode : Direction::ToNode;
}

} // namespace

KPIReport compute_kpis(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                       const milp::MILPInstance& instance, const solver::Solution& solution,
                       const KpiOptions& options)
{
    if (!solution.has_values() || solution.values.size() != instance.variables.size())
        throw Error(ErrorCode::MissingSolutionValue,
                    fmt::format("solution with status {} carries no values", solver::to_string(solution.status)));
    Values values(instance, solution);
    const auto& meta = instance.meta;
    const int hours = meta.hours;
    const int periods = static_cast<int>(meta.period_weight.size());

    KPIReport r;
    r.scenario = meta.scenario;
    r.status = solution.status;
    r.objective = milp::evaluate_objective(instance, solution.values);
    r.best_bound = solution.best_bound;
    r.gap = solution.gap;
    r.hours = hours;
    r.scale = options.annualize && hours > 0 ? kCostYearHours / hours : 1.0;
    for (std::size_t j = 0; j < solution.values.size(); ++j)
        values.of(static_cast<int>(j));

    double total_weight = 0.0;
    for (double w : meta.period_weight)
        total_weight += w;
    auto c = plans(graph, view, instance);

    std::map<std::string, CommodityKpi, std::less<>> commodities;
    for (const auto& u : c.units)
    {
        UnitKpi k;
        k.unit = u.name;
        k.existing = u.existing;
        if (u.candidates && periods > 0)
            k.invested = values.of({VarKind::UnitsInvestedAvailable, u.name, {}, Direction::None, periods - 1});

        const model::Relationship* output = nullptr;
        const model::Relationship* fallback = nullptr;
        for (const auto* rel : u.relationships)
        {
            if (rel->kind == RelationshipKind::UnitNodeNode || !view.contains(rel->ref(), "unit_capacity"))
                continue;
            if (!graph.is_node(rel->node1))
                continue;
            if (rel->kind == RelationshipKind::UnitToNode && !output)
                output = rel;
            if (rel->kind == RelationshipKind::UnitFromNode && !fallback)
                fallback = rel;
        }
        if (!output)
            output = fallback;
        if (output)
        {
            k.output_node = output->node1;
            k.output_direction = direction_of(*output);
            k.unit_capacity = view.number(output->ref(), "unit_capacity").value_or(0.0);
            k.installed_capacity = k.unit_capacity * (k.existing + k.invested);
            for (int h = 0; h < hours; ++h)
                k.production += values.of({VarKind::UnitFlow, u.name, k.output_node, k.output_direction, h});
            k.production *= r.scale;
            k.flh = full_load_hours(k.production, k.installed_capacity);
        }

        // Money.
        auto uref = model::EntityRef{EntityClass::Unit, u.name};
        double inv_cost = view.number(uref, "unit_investment_cost").value_or(0.0);
        double fom = view.number(uref, "fom_cost").value_or(0.0);
        if (u.candidates)
            for (int p = 0; p < periods; ++p)
            {
                double w = meta.period_weight[static_cast<std::size_t>(p)];
                r.costs.investment += inv_cost * w * values.of({VarKind::UnitsInvested, u.name, {}, Direction::None, p});
                r.costs.fom += fom * w * values.of({VarKind::UnitsInvestedAvailable, u.name, {}, Direction::None, p});
            }
        r.costs.fom += fom * u.existing * total_weight;

        for (const auto& [node, dir] : u.flows)
            if (dir == Direction::ToNode)
            {
                auto& ck = commodities[node];
                ck.node = node;
                for (int h = 0; h < hours; ++h)
                    ck.produced += values.of({VarKind::UnitFlow, u.name, node, dir, h});
            }

        for (const auto* rel : u.relationships)
        {
            if (rel->kind == RelationshipKind::UnitNodeNode || !view.contains(rel->ref(), "fuel_cost"))
                continue;
            Direction dir = direction_of(*rel);
            bool sink = dir == Direction::ToNode && graph.is_node(rel->node1) &&
                        view.text({EntityClass::Node, rel->node1}, "nodal_balance_sense").value_or("") == ">=";
            for (int h = 0; h < hours; ++h)
            {
                double cost = c.number_at(rel->ref(), "fuel_cost", h).value_or(0.0);
                if (cost == 0.0)
                    continue;
                double flow = 0.0;
                for (const auto& node : graph.expand(rel->node1))
                    flow += values.of({VarKind::UnitFlow, u.name, node, dir, h});
                if (cost > 0.0)
                    r.costs.fuel += cost * flow;
                else
                {
                    r.costs.revenue -= cost * flow;
                    if (sink)
                    {
                        auto& ck = commodities[rel->node1];
                        ck.node = rel->node1;
                        ck.sold += flow;
                    }
                }
            }
        }
        r.units.push_back(std::move(k));
    }

    for (const auto& s : c.storages)
    {
        StorageKpi k;
        k.node = s.node;
        k.existing = s.existing;
        if (s.candidates && periods > 0)
            k.invested = values.of({VarKind::StoragesInvestedAvailable, {}, s.node, Direction::None, periods - 1});
        k.state_cap = s.state_cap.value_or(0.0);
        k.installed_capacity = k.state_cap * (k.existing + k.invested);
        r.storages.push_back(k);

        auto nref = model::EntityRef{EntityClass::Node, s.node};
        double inv_cost = view.number(nref, "storage_investment_cost").value_or(0.0);
        double fom = view.number(nref, "storage_fom_cost").value_or(0.0);
        if (s.candidates)
            for (int p = 0; p < periods; ++p)
            {
                double w = meta.period_weight[static_cast<std::size_t>(p)];
                r.costs.investment +=
                    inv_cost * w * values.of({VarKind::StoragesInvested, {}, s.node, Direction::None, p});
                r.costs.fom +=
                    fom * w * values.of({VarKind::StoragesInvestedAvailable, {}, s.node, Direction::None, p});
            }
        r.costs.fom += fom * s.existing * total_weight;
    }

    for (auto& [node, k] : commodities)
    {
        k.produced *= r.scale;
        k.sold *= r.scale;
        r.commodities.push_back(k);
    }
    r.costs.fuel *= r.scale;
    r.costs.revenue *= r.scale;
    r.costs.investment *= r.scale;
    r.costs.fom *= r.scale;
    r.profit = -r.objective * r.scale;
    return r;
}

namespace
{

std::ofstream open_csv(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    return out;
}

void close_csv(std::ofstream& out, const std::filesystem::path& path)
{
    out.close();
    if (!out)
        throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::string num(double v)
{
    return format_number(v);
}

std::string_view direction_name(Direction d)
{
    return d == Direction::FromNode ? "from_node" : d == Direction::ToNode ? "to_node" : "";
}

} // namespace

void emit_results(const KPIReport& report, const milp::MILPInstance& instance, const solver::Solution& solution,
                  const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);

    {
        auto path = dir / "investments.csv";
        auto out = open_csv(path);
        out << "kind,name,existing,invested,unit_capacity,installed_capacity\n";
        for (const auto& u : report.units)
            out << "unit," << csv_escape(u.unit) << ',' << num(u.existing) << ',' << num(u.invested) << ','
                << num(u.unit_capacity) << ',' << num(u.installed_capacity) << '\n';
        for (const auto& s : report.storages)
            out << "storage," << csv_escape(s.node) << ',' << num(s.existing) << ',' << num(s.invested) << ','
                << num(s.state_cap) << ',' << num(s.installed_capacity) << '\n';
        close_csv(out, path);
    }

    {
        auto path = dir / "kpis.csv";
        auto out = open_csv(path);
        out << "section,name,metric,value\n";
        auto row = [&](std::string_view section, std::string_view name, std::string_view metric,
                       const std::string& value) {
            out << section << ',' << csv_escape(name) << ',' << metric << ',' << value << '\n';
        };
        row("run", report.scenario, "status", std::string(solver::to_string(report.status)));
        row("run", report.scenario, "objective", num(report.objective));
        row("run", report.scenario, "best_bound", num(report.best_bound));
        row("run", report.scenario, "gap", num(report.gap));
        row("run", report.scenario, "hours", std::to_string(report.hours));
        row("run", report.scenario, "scale", num(report.scale));
        row("total", "", "profit", num(report.profit));
        row("cost", "", "fuel", num(report.costs.fuel));
        row("cost", "", "revenue", num(report.costs.revenue));
        row("cost", "", "investment", num(report.costs.investment));
        row("cost", "", "fom", num(report.costs.fom));
        for (const auto& u : report.units)
        {
            if (u.output_node.empty())
                continue;
            row("unit", u.unit, "output_node", u.output_node);
            row("unit", u.unit, "production", num(u.production));
            row("unit", u.unit, "flh", num(u.flh));
        }
        for (const auto& c : report.commodities)
        {
            row("commodity", c.node, "produced", num(c.produced));
            row("commodity", c.node, "sold", num(c.sold));
        }
        close_csv(out, path);
    }

    {
        auto path = dir / "flows_hourly.csv";
        auto out = open_csv(path);
        out << "time,unit,node,direction,value\n";
        std::vector<std::size_t> flows;
        for (std::size_t j = 0; j < instance.variables.size(); ++j)
            if (instance.variables[j].ref.kind == VarKind::UnitFlow)
                flows.push_back(j);
        // Compiler order is unit-major; emit hour-major for plotting.
        std::stable_sort(flows.begin(), flows.end(), [&](std::size_t a, std::size_t b) {
            return instance.variables[a].ref.time < instance.variables[b].ref.time;
        });
        for (auto j : flows)
        {
            const auto& ref = instance.variables[j].ref;
            out << format_timestamp(instance.hour_start(ref.time)) << ',' << csv_escape(ref.unit) << ','
                << csv_escape(ref.node) << ',' << direction_name(ref.direction) << ',' << num(solution.values[j])
                << '\n';
        }
        close_csv(out, path);
    }

    {
        auto path = dir / "storage_state.csv";
        auto out = open_csv(path);
        out << "time,node,state\n";
        std::vector<std::size_t> states;
        for (std::size_t j = 0; j < instance.variables.size(); ++j)
            if (instance.variables[j].ref.kind == VarKind::NodeState)
                states.push_back(j);
        std::stable_sort(states.begin(), states.end(), [&](std::size_t a, std::size_t b) {
            return instance.variables[a].ref.time < instance.variables[b].ref.time;
        });
        for (auto j : states)
        {
            const auto& ref = instance.variables[j].ref;
            out << format_timestamp(instance.hour_start(ref.time)) << ',' << csv_escape(ref.node) << ','
                << num(solution.values[j]) << '\n';
        }
        close_csv(out, path);
    }
}

} // namespace hubopt::report
