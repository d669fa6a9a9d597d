#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heterovol {

enum class ErrorCode {
  // Input / validation failures.
  NonPositiveParameter,
  CorrelationOutOfRange,
  CorrelationMatrixNotPSD,
  NonFiniteInput,
  ParseError,
  NonPositivePrice,
  DuplicateDate,
  TooFewObservations,
  LagExceedsSample,
  TauLOutOfRange,
  InvalidArgument,
  // Numerical failures.
  DegenerateRates,
  MomentDiverges,
  OdeToleranceNotMet,
  UnstableLeverage,
  UnstableAcf,
  CholeskyFailure,
  NumericalBlowup,
  SingularMatrix,
  OptimizerStalled,
  TooManyRejections,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of a numerical procedure, false for rejected inputs.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace heterovol
