#pragma once

#include "hubopt/model/entity_graph.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace hubopt::model
{

/// Reads the flat model CSV (`class,entity,parameter,scenario,time,value`).
/// Values of the form `ts:<file>` load `<timeseries_dir>/<file>`.
/// Throws Error{UnknownEntity | DuplicateParameter | MalformedSeries | ParseError | IoFailure}.
EntityGraph load_dataset(const std::filesystem::path& model_file,
                         const std::filesystem::path& timeseries_dir);

EntityGraph parse_dataset(std::istream& in, const std::filesystem::path& timeseries_dir,
                          std::string_view source_name = "<stream>");

/// Reads a `timestamp,value` file; timestamps must be strictly increasing.
TimeSeries load_series(const std::filesystem::path& path);

/// Writes the graph back in the loader's format. File-backed series are written
/// into `timeseries_dir` under their original names.
void write_dataset(const EntityGraph& graph, const std::filesystem::path& model_file,
                   const std::filesystem::path& timeseries_dir);

void write_series(const TimeSeries& series, const std::filesystem::path& path);

/// Result of parameter resolution: number, flag, or enum text.
using Resolved = std::variant<double, bool, std::string>;

/// Value of `parameter` on `entity` from the highest-priority active layer
/// (`stack` lists layers lowest priority first). Series are sampled at `t` by
/// previous-value hold. Throws Error{Unresolved} or Error{UndeclaredLayer}.
Resolved resolve(const EntityGraph& graph, const EntityRef& entity, std::string_view parameter,
                 std::span<const std::string> stack, Timestamp t);

/// Entry of `values` belonging to the last layer of `stack` that defines one.
const ParameterValue* select_layer(const std::vector<ParameterValue>& values,
                                   std::span<const std::string> stack);

} // namespace hubopt::model
