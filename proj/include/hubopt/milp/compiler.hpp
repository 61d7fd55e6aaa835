#pragma once

#include "hubopt/milp/instance.hpp"
#include "hubopt/model/entity_graph.hpp"
#include "hubopt/scenario/scenario.hpp"

#include <optional>
#include <string>

namespace hubopt::milp
{

/// Operational and investment time structure of one compilation.
struct TemporalBlocks
{
    Timestamp start{};
    Duration resolution{std::chrono::hours{1}};
    int hours = 0;
    /// Length of one investment period; zero means a single period spanning the horizon.
    Duration investment_resolution{0};
    /// Annualisation base for investment and FOM costs.
    Duration cost_year{std::chrono::hours{8736}};
};

/// Reads model_start/model_end, the model's `operations_block` and
/// `investment_block` from the view. `horizon` replaces model_end when given.
/// Throws Error{Unresolved} when the model object or its times are missing.
TemporalBlocks derive_blocks(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                             std::optional<Duration> horizon = std::nullopt);

struct CompileOptions
{
    Mode mode = Mode::Milp;
    std::string scenario;
    /// Re-enables units_mothballed / storages_mothballed (fixed to 0 otherwise).
    bool allow_mothballing = false;
};

/// Builds the complete program. Variable and constraint order depend only on
/// the inputs. Throws Error{MissingCapacity | UnpinnedState | UnknownMember | Unresolved}.
MILPInstance compile(const model::EntityGraph& graph, const scenario::EffectiveView& view,
                     const TemporalBlocks& blocks, const CompileOptions& options = {});

} // namespace hubopt::milp
