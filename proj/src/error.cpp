#include "cokrige/error.hpp"

#include <utility>

namespace cokrige {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::DuplicateWellId: return "DuplicateWellId";
    case ErrorCode::DuplicateLocation: return "DuplicateLocation";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::AmbiguousMatch: return "AmbiguousMatch";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::NotColocated: return "NotColocated";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NoEligibleWells: return "NoEligibleWells";
    case ErrorCode::NoPairsWithinCutoff: return "NoPairsWithinCutoff";
    case ErrorCode::TooFewBins: return "TooFewBins";
    case ErrorCode::InfeasibleFit: return "InfeasibleFit";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidLmc: return "InvalidLmc";
    case ErrorCode::NegativeVariance: return "NegativeVariance";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::MismatchedSampleSets: return "MismatchedSampleSets";
    case ErrorCode::FoldSolveFailure: return "FoldSolveFailure";
    case ErrorCode::NonPositiveDefiniteCovariance: return "NonPositiveDefiniteCovariance";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::MalformedArtifact: return "MalformedArtifact";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::InvalidK:
      return ErrorCategory::Usage;
    case ErrorCode::NoPairsWithinCutoff:
    case ErrorCode::TooFewBins:
    case ErrorCode::InfeasibleFit:
    case ErrorCode::SingularSystem:
    case ErrorCode::InvalidLmc:
    case ErrorCode::NegativeVariance:
    case ErrorCode::FoldSolveFailure:
    case ErrorCode::NonPositiveDefiniteCovariance:
    case ErrorCode::DegenerateVariance:
      return ErrorCategory::Numerical;
    case ErrorCode::IoFailure:
    case ErrorCode::MissingInput:
    case ErrorCode::MalformedArtifact:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message, std::string subject, long row)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)),
      row_(row) {}

}  // namespace cokrige
