#include "fbmdrift/error.hpp"

namespace fbmdrift {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnknownKernel: return "UnknownKernel";
    case ErrorCode::InvalidGamma: return "InvalidGamma";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::MissingFineGrid: return "MissingFineGrid";
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::PlanInvalid: return "PlanInvalid";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace fbmdrift
