#include "hubopt/error.hpp"

namespace hubopt
{

std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::DuplicateParameter: return "DuplicateParameter";
    case ErrorCode::MalformedSeries: return "MalformedSeries";
    case ErrorCode::Unresolved: return "Unresolved";
    case ErrorCode::UndeclaredLayer: return "UndeclaredLayer";
    case ErrorCode::MissingCapacity: return "MissingCapacity";
    case ErrorCode::UnpinnedState: return "UnpinnedState";
    case ErrorCode::UnknownMember: return "UnknownMember";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::SubprocessFailure: return "SubprocessFailure";
    case ErrorCode::AuditFailure: return "AuditFailure";
    case ErrorCode::MissingSolutionValue: return "MissingSolutionValue";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace hubopt
