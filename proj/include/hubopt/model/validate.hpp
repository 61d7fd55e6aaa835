#pragma once

#include "hubopt/model/entity_graph.hpp"

#include <string>
#include <vector>

namespace hubopt::model
{

enum class Severity
{
    Warning,
    Error,
};

struct Diagnostic
{
    Severity severity = Severity::Error;
    std::string subject;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

std::string to_string(const Diagnostic& d);

/// Structural checks over every layer of the graph. Never throws; an empty
/// result means the graph satisfies all entity invariants.
std::vector<Diagnostic> validate_graph(const EntityGraph& graph);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

} // namespace hubopt::model
