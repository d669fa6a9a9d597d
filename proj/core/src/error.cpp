#include "heterovol/error.hpp"

namespace heterovol {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorCode::CorrelationMatrixNotPSD: return "CorrelationMatrixNotPSD";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::LagExceedsSample: return "LagExceedsSample";
    case ErrorCode::TauLOutOfRange: return "TauLOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateRates: return "DegenerateRates";
    case ErrorCode::MomentDiverges: return "MomentDiverges";
    case ErrorCode::OdeToleranceNotMet: return "OdeToleranceNotMet";
    case ErrorCode::UnstableLeverage: return "UnstableLeverage";
    case ErrorCode::UnstableAcf: return "UnstableAcf";
    case ErrorCode::CholeskyFailure: return "CholeskyFailure";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::OptimizerStalled: return "OptimizerStalled";
    case ErrorCode::TooManyRejections: return "TooManyRejections";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  return code >= ErrorCode::DegenerateRates;
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace heterovol
