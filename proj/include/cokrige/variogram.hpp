#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cokrige/types.hpp"

namespace cokrige {

/// Standardized structure families. `range` is the practical range: the
/// exponential and gaussian shapes carry a factor 3 and reach ~95% of the
/// sill at h = range.
enum class Structure { Spherical, Exponential, Gaussian };

std::string_view to_string(Structure structure) noexcept;
Structure parse_structure(std::string_view name);

/// Unit-sill shape s(t) with t = h / range:
///   spherical   1.5t - 0.5t^3 for t < 1, else 1
///   exponential 1 - exp(-3t)
///   gaussian    1 - exp(-3t^2)
double structure_shape(Structure structure, double t) noexcept;

enum class VariogramKind { Direct, Cross };

struct LagBin {
  double lag = 0.0;  // mean separation of the pairs in the bin
  double gamma = 0.0;
  std::size_t pair_count = 0;
};

struct EmpiricalVariogram {
  std::vector<LagBin> bins;  // non-empty bins only, lag strictly increasing
  double cutoff = 0.0;
  double bin_width = 0.0;
  VariogramKind kind = VariogramKind::Direct;
};

inline constexpr int kDefaultBins = 15;

/// One third of the bounding-box diagonal of the samples.
double default_cutoff(std::span<const SpatialSample> samples);

/// Classical (Matheron) estimator. Pairs farther apart than `cutoff` and
/// pairs at zero separation are ignored; bins are [b*w, (b+1)*w) with
/// w = cutoff / n_bins and the last bin closed at the cutoff.
EmpiricalVariogram empirical_variogram(std::span<const SpatialSample> samples, double cutoff, int n_bins,
                                       Execution execution = Execution::Parallel);

/// Cross semivariogram 1/(2N) sum (u_i - u_j)(v_i - v_j) of a co-located dataset.
EmpiricalVariogram empirical_cross_variogram(const MultivariateDataset& dataset, double cutoff, int n_bins,
                                             Execution execution = Execution::Parallel);

/// Nugget plus one structure.
struct VariogramModel {
  double nugget = 0.0;
  Structure structure = Structure::Spherical;
  double partial_sill = 0.0;
  double range = 1.0;

  double sill() const { return nugget + partial_sill; }
};

/// 0 at h = 0; nugget + partial_sill * s(h / range) for h > 0.
double model_value(const VariogramModel& model, double h) noexcept;

/// Linear model of coregionalization for (primary, secondary). Index 0 is
/// the primary variable, 1 the secondary.
struct LmcModel {
  Structure structure = Structure::Spherical;
  double range = 1.0;
  Eigen::Matrix2d nugget = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d sill = Eigen::Matrix2d::Zero();

  /// Direct (a == b) or cross semivariogram between variables a and b.
  double value(int a, int b, double h) const noexcept;

  /// Covariance counterpart C_ab(h) = nugget_ab + sill_ab - gamma_ab(h).
  double covariance(int a, int b, double h) const noexcept;

  VariogramModel direct(int a) const;

  /// Both coefficient matrices symmetric with eigenvalues >= -tolerance.
  bool is_valid(double tolerance = 1e-10) const;
};

/// Weighted least-squares objective, weights pair_count / lag^2.
double wls_objective(const EmpiricalVariogram& empirical, const VariogramModel& model);

struct ModelFit {
  VariogramModel model;
  double objective = 0.0;
  bool converged = false;
  bool degenerate_range = false;  // range not identifiable (no structured variance, or pinned at the search bound)
  int iterations = 0;
};

/// Golden-section search on the range; nugget and partial sill come from a
/// closed-form non-negative WLS solve at each trial range. `initial.range`
/// seeds the coarse scan that brackets the search.
ModelFit fit_model(const EmpiricalVariogram& empirical, Structure structure, const VariogramModel& initial);
ModelFit fit_model(const EmpiricalVariogram& empirical, Structure structure);

struct LmcFit {
  LmcModel model;
  double objective = 0.0;  // sum of the three WLS objectives
  bool converged = false;
  bool projected = false;  // a coefficient matrix was moved onto the PSD cone
};

/// Fits the shared range on the primary direct variogram, then per-variogram
/// nugget/sill coefficients at that range, then projects each coefficient
/// matrix onto the PSD cone if needed. Throws InfeasibleFit when the
/// projection moves a coefficient by more than half its magnitude.
LmcFit fit_lmc(const EmpiricalVariogram& direct_primary, const EmpiricalVariogram& direct_secondary,
               const EmpiricalVariogram& cross, Structure structure);

/// Nearest PSD matrix in the Frobenius norm (negative eigenvalues clipped).
Eigen::Matrix2d project_psd(const Eigen::Matrix2d& matrix);

struct RangeDiagnostic {
  double range_full = 0.0;
  double range_colocated = 0.0;
};

/// Fits a direct model to the full secondary sample set and to its
/// co-located subset and reports both ranges.
RangeDiagnostic range_diagnostic(std::span<const SpatialSample> full_secondary,
                                 std::span<const SpatialSample> colocated_secondary, double cutoff, int n_bins,
                                 Structure structure);

// Text artifacts: bins as CSV (lag,gamma,pair_count with a '#' metadata
// line), models as "key = value" lines.
void write_variogram_csv(std::ostream& out, const EmpiricalVariogram& empirical);
EmpiricalVariogram read_variogram_csv(std::istream& in);

void write_model_text(std::ostream& out, const VariogramModel& model);
void write_model_text(std::ostream& out, const LmcModel& model);

struct ModelFile {
  std::optional<VariogramModel> variogram;
  std::optional<LmcModel> lmc;
};

/// Reads either model kind back; unknown keys are ignored.
ModelFile read_model_text(std::istream& in);

}  // namespace cokrige
