#pragma once

#include <stdexcept>
#include <string>

namespace ssvd {

// Machine-parsable error codes. The CLI prints "error <name>: <message>" and
// exits nonzero; library callers catch ssvd::Error and branch on code().
enum class ErrorCode {
  NonPositiveAspectRatio,
  NegativeTheta,
  ShapeMismatch,
  RankTooLarge,
  ConvergenceFailure,
  NotSymmetric,
  DegenerateTopEigenvalue,
  SubsetEmpty,
  TooManyTablesForEnumeration,
  NoSecularRoot,
  AmbiguousComponentOrder,
  EpsilonOutOfRange,
  NoOutlierSingularValue,
  ReferenceBelowThreshold,
  AllTablesBelowThreshold,
  NegativeCounts,
  InvalidPlan,
  IoError,
  ConfigError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ssvd
