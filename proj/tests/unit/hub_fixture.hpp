#pragma once

// Builds small hubs from inline CSV text. Series are written to a scratch
// directory as hourly files starting 2019-01-01T00:00.

#include "hubopt/milp/compiler.hpp"
#include "hubopt/model/dataset.hpp"
#include "hubopt/scenario/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fixture
{

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("hubopt_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_series(const std::filesystem::path& path, const std::vector<double>& values)
{
    std::ofstream out(path);
    out << "timestamp,value\n";
    for (std::size_t h = 0; h < values.size(); ++h)
    {
        char stamp[32];
        std::snprintf(stamp, sizeof stamp, "2019-01-%02dT%02d:00:00", 1 + static_cast<int>(h / 24),
                      static_cast<int>(h % 24));
        out << stamp << ',' << values[h] << '\n';
    }
}

struct Hub
{
    hubopt::model::EntityGraph graph;
    hubopt::scenario::EffectiveView view;
    hubopt::milp::TemporalBlocks blocks;
    hubopt::milp::MILPInstance instance;
};

/// `rows` are CSV lines without header; a model `M` starting 2019-01-01 with an
/// hourly `operation` block is prepended. Layers are declared automatically.
inline Hub build(const std::string& name, const std::string& rows, const std::vector<std::string>& layers,
                 int hours, const std::map<std::string, std::vector<double>>& series = {},
                 hubopt::milp::Mode mode = hubopt::milp::Mode::Milp)
{
    auto dir = scratch_dir(name);
    for (const auto& [file, values] : series)
        write_series(dir / file, values);
    std::ostringstream csv;
    csv << "class,entity,parameter,scenario,time,value\n";
    for (const auto& layer : layers)
        csv << "scenario," << layer << ",,,,\n";
    csv << "model,M,model_start,Base,,2019-01-01T00:00:00\n"
        << "model,M,model_end,Base,,2019-01-02T00:00:00\n"
        << "model,M,operations_block,Base,,operation\n"
        << "temporal_block,operation,resolution,Base,,1h\n";
    csv << rows;
    std::istringstream in(csv.str());

    Hub hub;
    hub.graph = hubopt::model::parse_dataset(in, dir, name);
    hub.view = hubopt::scenario::compose(hub.graph, {name, layers});
    hub.blocks = hubopt::milp::derive_blocks(hub.graph, hub.view, std::chrono::hours{hours});
    hubopt::milp::CompileOptions options;
    options.mode = mode;
    options.scenario = name;
    hub.instance = hubopt::milp::compile(hub.graph, hub.view, hub.blocks, options);
    return hub;
}

/// `units` electrolyzer stacks buying power at the `price.csv` series and selling H2 at 2160 per t.
inline std::string toy_electrolyzer(const std::string& extra = {}, int units = 1)
{
    return "node,El,nodal_balance_sense,Base,,<=\n"
           "node,H2O,nodal_balance_sense,Base,,<=\n"
           "node,H2,nodal_balance_sense,Base,,>=\n"
           "unit,elz,,,,\n"
           "unit,elz,number_of_units,Base,," + std::to_string(units) + "\n"
           "unit__to_node,elz|H2,unit_capacity,Base,,0.0081\n"
           "unit__to_node,elz|H2,fuel_cost,Base,,-2160\n"
           "unit__from_node,elz|El,fuel_cost,Base,,ts:price.csv\n"
           "unit__from_node,elz|H2O,fuel_cost,Base,,0\n"
           "unit__node__node,elz|El|H2,fix_ratio_in_out_unit_flow,Base,,53.6\n"
           "unit__node__node,elz|H2O|H2,fix_ratio_in_out_unit_flow,Base,,9.9999\n" +
           extra;
}

#ifdef HUBOPT_TEST_DATA_DIR
inline const hubopt::model::EntityGraph& bundled_graph()
{
    static const auto graph = hubopt::model::load_dataset(std::filesystem::path(HUBOPT_TEST_DATA_DIR) / "gls.csv",
                                                          std::filesystem::path(HUBOPT_TEST_DATA_DIR) / "ts");
    return graph;
}

/// Builtin stack on the bundled data with candidates scaled to a tenth.
inline Hub bundled(const std::string& stack, int hours, hubopt::milp::Mode mode = hubopt::milp::Mode::Milp)
{
    Hub hub;
    hub.graph = bundled_graph();
    hub.view = hubopt::scenario::compose(hub.graph, *hubopt::scenario::find_builtin(stack));
    hubopt::scenario::scale_candidates(hub.view, 0.1);
    hub.blocks = hubopt::milp::derive_blocks(hub.graph, hub.view, std::chrono::hours{hours});
    hubopt::milp::CompileOptions options;
    options.mode = mode;
    options.scenario = stack;
    hub.instance = hubopt::milp::compile(hub.graph, hub.view, hub.blocks, options);
    return hub;
}
#endif

} // namespace fixture
