#include "hololab/error.hpp"

namespace hololab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::FamilyNotTrivial: return "FamilyNotTrivial";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::NotTotallyGeodesic: return "NotTotallyGeodesic";
    case ErrorCode::LogUndefined: return "LogUndefined";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::UnknownExample: return "UnknownExample";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace hololab
