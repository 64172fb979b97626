#include "ssvd/errors.hpp"

namespace ssvd {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveAspectRatio: return "NonPositiveAspectRatio";
    case ErrorCode::NegativeTheta: return "NegativeTheta";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DegenerateTopEigenvalue: return "DegenerateTopEigenvalue";
    case ErrorCode::SubsetEmpty: return "SubsetEmpty";
    case ErrorCode::TooManyTablesForEnumeration: return "TooManyTablesForEnumeration";
    case ErrorCode::NoSecularRoot: return "NoSecularRoot";
    case ErrorCode::AmbiguousComponentOrder: return "AmbiguousComponentOrder";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::NoOutlierSingularValue: return "NoOutlierSingularValue";
    case ErrorCode::ReferenceBelowThreshold: return "ReferenceBelowThreshold";
    case ErrorCode::AllTablesBelowThreshold: return "AllTablesBelowThreshold";
    case ErrorCode::NegativeCounts: return "NegativeCounts";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace ssvd
