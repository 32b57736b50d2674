#include "errors.hpp"

namespace scaleevo {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidScalePair: return "InvalidScalePair";
    case ErrorCode::RangeOverflow: return "RangeOverflow";
    case ErrorCode::TimeOrderViolation: return "TimeOrderViolation";
    case ErrorCode::ExistenceHorizonExceeded: return "ExistenceHorizonExceeded";
    case ErrorCode::HorizonTooTight: return "HorizonTooTight";
    case ErrorCode::HorizonExhausted: return "HorizonExhausted";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::ContractionCertificateFailed: return "ContractionCertificateFailed";
    case ErrorCode::ClosureUnsound: return "ClosureUnsound";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidScalePair:
    case ErrorCode::TimeOrderViolation:
    case ErrorCode::ConfigError:
      return 2;
    default:
      return 1;
  }
}

}  // namespace scaleevo
