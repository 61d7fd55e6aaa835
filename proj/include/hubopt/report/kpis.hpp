#pragma once

// Result figures of one solved scenario and the CSV tables written from them.

#include "hubopt/milp/instance.hpp"
#include "hubopt/model/entity_graph.hpp"
#include "hubopt/scenario/scenario.hpp"
#include "hubopt/solver/solution.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hubopt::report
{

/// Hours in the cost year used for annualisation.
inline constexpr double kCostYearHours = 8736.0;

/// production / installed_capacity; 0 when nothing is installed.
inline double full_load_hours(double production, double installed_capacity)
{
    return installed_capacity > 0.0 ? production / installed_capacity : 0.0;
}

struct UnitKpi
{
    std::string unit;
    double existing = 0.0;
    double invested = 0.0;
    /// Node whose inflow counts as production (first capacity-bearing to_node
    /// relationship on a plain node; else the first from_node one). Empty if none.
    std::string output_node;
    milp::Direction output_direction = milp::Direction::None;
    double unit_capacity = 0.0;
    double installed_capacity = 0.0;
    double production = 0.0;
    /// production / installed_capacity; 0 when nothing is installed.
    double flh = 0.0;
};

struct StorageKpi
{
    std::string node;
    double existing = 0.0;
    double invested = 0.0;
    double state_cap = 0.0;
    double installed_capacity = 0.0;
};

struct CommodityKpi
{
    std::string node;
    /// Gross unit output into the node.
    double produced = 0.0;
    /// Inflow into a `>=` node over relationships with a negative fuel_cost.
    double sold = 0.0;
};

struct CostBreakdown
{
    /// Positive fuel_cost flows.
    double fuel = 0.0;
    /// Negative fuel_cost flows, sign flipped.
    double revenue = 0.0;
    double investment = 0.0;
    double fom = 0.0;
};

struct KPIReport
{
    std::string scenario;
    solver::Status status = solver::Status::IterationLimit;
    double objective = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;
    int hours = 0;
    /// Multiplier applied to every flow- and money-valued figure (1 unless annualised).
    double scale = 1.0;
    std::vector<UnitKpi> units;
    std::vector<StorageKpi> storages;
    std::vector<CommodityKpi> commodities;
    CostBreakdown costs;
    /// -objective, scaled.
    double profit = 0.0;
};

struct KpiOptions
{
    /// Scale horizon figures by kCostYearHours / hours.
    bool annualize = false;
};

/// `instance` must have been compiled from `graph` and `view`.
/// Throws Error{MissingSolutionValue} when the solution lacks a value.
KPIReport compute_kpis(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                       const milp::MILPInstance& instance, const solver::Solution& solution,
                       const KpiOptions& options = {});

/// Writes investments.csv, kpis.csv, flows_hourly.csv and storage_state.csv
/// into `dir` (created if needed). Throws Error{IoFailure}.
void emit_results(const KPIReport& report, const milp::MILPInstance& instance, const solver::Solution& solution,
                  const std::filesystem::path& dir);

} // namespace hubopt::report
