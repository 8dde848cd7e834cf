#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cokrige {

enum class ErrorCode {
  // ingestion and preprocessing
  MissingColumn,
  ParseFailure,
  DuplicateWellId,
  DuplicateLocation,
  NonPositiveValue,
  AmbiguousMatch,
  DegenerateVariance,
  NotColocated,
  // well performance index
  EmptySeries,
  MissingField,
  NoEligibleWells,
  // variograms
  NoPairsWithinCutoff,
  TooFewBins,
  InfeasibleFit,
  InvalidModel,
  // kriging
  SingularSystem,
  InvalidLmc,
  NegativeVariance,
  // cross-validation
  InvalidK,
  MismatchedSampleSets,
  FoldSolveFailure,
  // simulation
  NonPositiveDefiniteCovariance,
  // files and command line
  IoFailure,
  MissingInput,
  MalformedArtifact,
  Usage,
};

enum class ErrorCategory { Usage = 1, Data = 2, Numerical = 3, Io = 4 };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

/// Process exit status used by the command-line front-end for an error.
inline int exit_code(ErrorCode code) noexcept { return static_cast<int>(category(code)); }

/// Exception carried by every module. `subject` names the offending field,
/// column or file when there is one; `row` is the 1-based data row for
/// CSV errors and -1 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {}, long row = -1);

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  long row() const noexcept { return row_; }

 private:
  ErrorCode code_;
  std::string subject_;
  long row_;
};

}  // namespace cokrige
