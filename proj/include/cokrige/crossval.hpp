#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cokrige/types.hpp"
#include "cokrige/variogram.hpp"

namespace cokrige {

/// SplitMix64. The whole fold-planning path is integer arithmetic so plans
/// are identical on every platform:
///   state += 0x9E3779B97F4A7C15
///   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept;
  /// Uniform in [0, bound) by rejection of the biased low range.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

inline constexpr std::size_t kLeaveOneOut = 0;

/// Fold assignment. k-fold plans shuffle the indices (Fisher-Yates driven by
/// SplitMix64(seed)) and deal them round-robin, so fold sizes differ by at
/// most one. Leave-one-out puts sample i in fold i.
struct FoldPlan {
  std::size_t k = 0;
  bool leave_one_out = false;
  std::vector<std::size_t> assignments;
  std::uint64_t seed = 0;

  std::vector<std::vector<std::size_t>> folds() const;
};

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

enum class RefitPolicy { FixedModel, RefitPerFold };
enum class EstimatorKind { Ok, Ck };

/// Held-out primary samples are always removed. For co-kriging the secondary
/// value at a held-out location is kept by default.
enum class SecondaryAtTarget { Retain, Remove };

struct EstimatorConfig {
  std::string name;
  EstimatorKind kind = EstimatorKind::Ok;
  Structure structure = Structure::Spherical;
  double cutoff = 0.0;
  int n_bins = kDefaultBins;
  VariogramModel model;  // used by Ok
  LmcModel lmc;          // used by Ck
  SecondaryAtTarget secondary_at_target = SecondaryAtTarget::Retain;
  double fit_objective = 0.0;
};

struct Residual {
  std::size_t index = 0;
  double truth = 0.0;
  double predicted = 0.0;
  double residual = 0.0;  // truth - predicted
};

struct ErrorStats {
  double me = 0.0;
  double rmse = 0.0;
};

/// Mean error and root-mean-square error of residuals.
ErrorStats error_stats(std::span<const double> residuals);

struct CvReport {
  std::string estimator_name;
  std::vector<Residual> residuals;  // sorted by sample index
  double me = 0.0;
  double rmse = 0.0;
  double wall_clock = 0.0;  // seconds
  std::size_t n = 0;        // samples in the dataset
  std::vector<std::size_t> failed_folds;
  double fit_objective = 0.0;

  bool partial() const { return !failed_folds.empty(); }
};

/// Predicts every held-out primary sample from the rest. A fold whose system
/// cannot be solved is recorded in `failed_folds` and skipped.
CvReport cross_validate(const EstimatorConfig& estimator, const MultivariateDataset& data, const FoldPlan& plan,
                        RefitPolicy refit = RefitPolicy::FixedModel, Execution execution = Execution::Parallel);

struct ComparisonRow {
  std::string estimator;
  double me = 0.0;
  double rmse = 0.0;
  double wall_clock = 0.0;
  double fit_objective = 0.0;
  bool partial = false;
};

/// Rows sorted by RMSE ascending (stable). Throws MismatchedSampleSets when
/// the reports were not produced on the same samples.
std::vector<ComparisonRow> compare_estimators(std::span<const CvReport> reports);

void write_cv_report_csv(std::ostream& out, const CvReport& report);
std::vector<Residual> read_cv_report_csv(std::istream& in);

/// estimator,Mean Error,RMSE,Running Time,Fit Objective. Running Time is
/// left blank when `with_timing` is false so the file stays reproducible.
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows, bool with_timing = true);
std::vector<ComparisonRow> read_comparison_csv(std::istream& in);

/// Fixed-width text rendering of the comparison.
std::string format_comparison_table(std::span<const ComparisonRow> rows);

}  // namespace cokrige
