#include "asep/error.hpp"

namespace asep {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::RateConstraintViolated: return "RateConstraintViolated";
    case ErrorCode::WindowExcludesOrigin: return "WindowExcludesOrigin";
    case ErrorCode::ProfileOutOfRange: return "ProfileOutOfRange";
    case ErrorCode::ClockTooShort: return "ClockTooShort";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::NonStochasticGenerator: return "NonStochasticGenerator";
    case ErrorCode::MissingTags: return "MissingTags";
    case ErrorCode::OutOfRegion: return "OutOfRegion";
    case ErrorCode::NotInitiallyOrdered: return "NotInitiallyOrdered";
    case ErrorCode::PremiseViolatedAtTimeZero: return "PremiseViolatedAtTimeZero";
    case ErrorCode::DominationBroken: return "DominationBroken";
    case ErrorCode::InadmissibleAlpha: return "InadmissibleAlpha";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::JOutOfRange: return "JOutOfRange";
    case ErrorCode::DivergentParameter: return "DivergentParameter";
    case ErrorCode::TruncationTooLarge: return "TruncationTooLarge";
    case ErrorCode::TruncationUnsound: return "TruncationUnsound";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace asep
