#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hubopt
{

enum class ErrorCode
{
    ParseError,
    IoFailure,
    UnknownEntity,
    DuplicateParameter,
    MalformedSeries,
    Unresolved,
    UndeclaredLayer,
    MissingCapacity,
    UnpinnedState,
    UnknownMember,
    NumericalBreakdown,
    UnknownVariable,
    MalformedLine,
    SubprocessFailure,
    AuditFailure,
    MissingSolutionValue,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the toolchain; `code()` identifies the failure class.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace hubopt
