#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbmdrift {

enum class ErrorCode {
  InvalidArgument,
  NegativeEigenvalue,
  InvalidExponent,
  UnknownModel,
  InvalidParams,
  UnknownKernel,
  InvalidGamma,
  NonFiniteState,
  MissingFineGrid,
  EmptyCurve,
  PlanInvalid,
  EmptyReport,
  IoError,
  UsageError,
};

std::string_view to_string(ErrorCode code);

//! Library error carrying a machine-readable code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace fbmdrift
