#pragma once

#include <stdexcept>
#include <string>

namespace asep {

enum class ErrorCode {
  RateConstraintViolated,
  WindowExcludesOrigin,
  ProfileOutOfRange,
  ClockTooShort,
  WindowMismatch,
  StateSpaceTooLarge,
  NonStochasticGenerator,
  MissingTags,
  OutOfRegion,
  NotInitiallyOrdered,
  PremiseViolatedAtTimeZero,
  DominationBroken,
  InadmissibleAlpha,
  ParameterOutOfRange,
  JOutOfRange,
  DivergentParameter,
  TruncationTooLarge,
  TruncationUnsound,
  InvalidSpec,
  Io,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace asep
