#pragma once

#include <stdexcept>
#include <string>

namespace scaleevo {

// Numeric values mirror se_status in the public C header.
enum class ErrorCode {
  InvalidInput = 1,
  InvalidScalePair = 2,
  RangeOverflow = 3,
  TimeOrderViolation = 4,
  ExistenceHorizonExceeded = 5,
  HorizonTooTight = 6,
  HorizonExhausted = 7,
  OracleFailure = 8,
  ContractionCertificateFailed = 9,
  ClosureUnsound = 10,
  ConfigError = 11,
  IoError = 12,
  Internal = 13,
};

const char* error_code_name(ErrorCode code) noexcept;
// Process exit status for a failure: 2 for configuration and usage errors, 1 otherwise.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by global evolution when the alpha ceiling cannot cover the span.
class HorizonExhaustedError : public Error {
 public:
  HorizonExhaustedError(const std::string& what, double reachable_t)
      : Error(ErrorCode::HorizonExhausted, what), reachable_t_(reachable_t) {}
  double reachable_t() const noexcept { return reachable_t_; }

 private:
  double reachable_t_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace scaleevo
