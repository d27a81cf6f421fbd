#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wmt {

enum class ErrorCode {
  // validation
  LengthNotDyadic,
  MixedKinds,
  DimensionMismatch,
  BadWeights,
  ParseError,
  TooLarge,
  DegenerateMap,
  BadParameter,
  UnsupportedExponent,
  KindMismatch,
  IncompatibleDetail,
  TooShort,
  BadLength,
  Misaligned,
  BadSpec,
  SingularPoint,
  ParticleHitCharge,
  // environment
  IoError,
  // solver
  NumericalFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Coarse classification used for process exit codes.
enum class ErrorCategory { Validation, Io, Numerical };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace wmt
