#include "wmt/errors.hpp"

namespace wmt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::LengthNotDyadic: return "LengthNotDyadic";
    case ErrorCode::MixedKinds: return "MixedKinds";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateMap: return "DegenerateMap";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::UnsupportedExponent: return "UnsupportedExponent";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::IncompatibleDetail: return "IncompatibleDetail";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::Misaligned: return "Misaligned";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::ParticleHitCharge: return "ParticleHitCharge";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoError: return ErrorCategory::Io;
    case ErrorCode::NumericalFailure: return ErrorCategory::Numerical;
    default: return ErrorCategory::Validation;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace wmt
