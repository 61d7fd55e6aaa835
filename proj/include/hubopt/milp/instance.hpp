#pragma once

// Compiled mixed-integer program: variables with bounds and domains, tagged
// linear constraints, and a minimised objective.

#include "hubopt/text.hpp"

#include <compare>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hubopt::milp
{

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind
{
    UnitFlow,
    UnitsOn,
    UnitsAvailable,
    UnitsStarted,
    UnitsShutDown,
    UnitsInvested,
    UnitsInvestedAvailable,
    UnitsMothballed,
    NodeState,
    StoragesInvested,
    StoragesInvestedAvailable,
    StoragesMothballed,
};

std::string_view to_string(VarKind kind);

enum class Domain
{
    Continuous,
    Integer,
    Binary,
};

enum class Direction
{
    None,
    FromNode,
    ToNode,
};

/// Identity of a variable. `time` is an hour index for operational kinds
/// (-1 is the pre-horizon storage state) and a period index for investment kinds.
struct VariableRef
{
    VarKind kind = VarKind::UnitFlow;
    std::string unit;
    std::string node;
    Direction direction = Direction::None;
    int time = 0;

    auto operator<=>(const VariableRef&) const = default;
};

/// Stable printable name, e.g. `unit_flow.H2_syn.H2.h0017`.
std::string variable_name(const VariableRef& ref);

struct Variable
{
    VariableRef ref;
    Domain domain = Domain::Continuous;
    double lower = 0.0;
    double upper = kInf;

    bool is_integer() const { return domain != Domain::Continuous; }
};

enum class Sense
{
    LE,
    GE,
    EQ,
};

std::string_view to_string(Sense sense);

struct Term
{
    int var = 0;
    double coeff = 0.0;

    bool operator==(const Term&) const = default;
};

struct LinearConstraint
{
    std::vector<Term> terms;
    Sense sense = Sense::LE;
    double rhs = 0.0;
    std::string tag;
};

enum class Mode
{
    Milp,
    Lp,
};

struct Metadata
{
    std::string scenario;
    Mode mode = Mode::Milp;
    Timestamp start{};
    Duration resolution{std::chrono::hours{1}};
    int hours = 0;
    /// Investment period of each hour.
    std::vector<int> period_of_hour;
    /// Fraction of an annualised cost charged per period (hours inside horizon / period length).
    std::vector<double> period_weight;
};

class MILPInstance
{
public:
    Metadata meta;
    std::vector<Variable> variables;
    std::vector<LinearConstraint> constraints;
    /// Minimised; may contain one term per variable at most after normalize().
    std::vector<Term> objective;
    /// Constant part of the objective (for example FOM of existing assets).
    double objective_offset = 0.0;

    /// Adds a variable; throws if the ref already exists.
    int add_variable(const VariableRef& ref, Domain domain, double lower = 0.0, double upper = kInf);
    std::optional<int> find(const VariableRef& ref) const;
    int at(const VariableRef& ref) const;

    /// Merges duplicate terms in constraints and objective and drops zeros.
    void normalize();

    std::size_t integer_count() const;
    std::size_t nonzero_count() const;

    Timestamp hour_start(int h) const { return meta.start + meta.resolution * h; }

private:
    std::map<VariableRef, int> index_;
};

/// Objective value of `values` including the offset.
double evaluate_objective(const MILPInstance& instance, const std::vector<double>& values);

/// Activity (left-hand side) of constraint `c`.
double activity(const LinearConstraint& c, const std::vector<double>& values);

/// Amount by which `values` violates constraint `c` (0 when satisfied).
double violation(const LinearConstraint& c, const std::vector<double>& values);

struct AuditReport
{
    double max_residual = 0.0;
    /// Tag of the worst constraint, or `bound:<var>` / `integrality:<var>`.
    std::string worst;
    std::size_t violations = 0;
    bool ok = true;
};

/// Re-evaluates every constraint, bound and integrality requirement.
AuditReport audit(const MILPInstance& instance, const std::vector<double>& values,
                  double tolerance = 1e-6, double integrality_tolerance = 1e-6);

} // namespace hubopt::milp
