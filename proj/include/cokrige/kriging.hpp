#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "cokrige/types.hpp"
#include "cokrige/variogram.hpp"

namespace cokrige {

enum class Variable { Primary, Secondary };

struct Weight {
  Variable variable = Variable::Primary;
  std::size_t index = 0;
  double value = 0.0;
};

enum class CellFlag { Ok, ClampedVariance, Singular, NegativeVariance };

std::string_view to_string(CellFlag flag) noexcept;
CellFlag parse_cell_flag(std::string_view text);

struct KrigingResult {
  Location location;
  double prediction = 0.0;  // log10 scale
  double variance = 0.0;
  std::vector<Weight> weights;
  CellFlag flag = CellFlag::Ok;
};

/// Semivariogram-form system. The data block comes first (primary samples,
/// then secondary samples for co-kriging) followed by one unbiasedness row
/// per variable. Unbiasedness rows hold ones and rhs (1, 0).
struct KrigingSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  std::vector<std::pair<Variable, std::size_t>> sample_index;
  std::size_t constraints = 0;
};

KrigingSystem assemble_ok_system(std::span<const SpatialSample> samples, const VariogramModel& model,
                                 const Location& target);
KrigingSystem assemble_ck_system(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                                 const LmcModel& lmc, const Location& target);

inline constexpr double kSingularRcond = 1e-12;
inline constexpr double kVarianceTolerance = 1e-9;

/// Ordinary kriging with a global neighborhood. The left-hand side does not
/// depend on the target, so it is factorized once on construction.
class OrdinaryKriging {
 public:
  OrdinaryKriging(std::span<const SpatialSample> samples, const VariogramModel& model);

  KrigingResult predict(const Location& target, bool keep_weights = true) const;
  double rcond() const { return rcond_; }
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<SpatialSample> samples_;
  VariogramModel model_;
  double constraint_scale_ = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0.0;
};

/// Ordinary co-kriging with primary weights summing to 1 and secondary
/// weights summing to 0. Primary and secondary locations may differ.
class CoKriging {
 public:
  CoKriging(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary, const LmcModel& lmc);

  KrigingResult predict(const Location& target, bool keep_weights = true) const;
  double rcond() const { return rcond_; }

 private:
  std::vector<SpatialSample> primary_;
  std::vector<SpatialSample> secondary_;
  LmcModel lmc_;
  double constraint_scale_ = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0.0;
};

KrigingResult solve_ok(std::span<const SpatialSample> samples, const VariogramModel& model, const Location& target);

/// Requires a co-located dataset.
KrigingResult solve_ck(const MultivariateDataset& dataset, const LmcModel& lmc, const Location& target);

/// General form used when the secondary set differs from the primary one
/// (e.g. cross-validation that keeps the secondary value at the target).
KrigingResult solve_ck(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                       const LmcModel& lmc, const Location& target);

struct GridSpec {
  Location origin;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  std::size_t cell_count() const { return nx * ny; }
  /// Cells are stored row by row: index = j * nx + i.
  Location cell_center(std::size_t i, std::size_t j) const {
    return {origin.x + (static_cast<double>(i) + 0.5) * dx, origin.y + (static_cast<double>(j) + 0.5) * dy};
  }

  /// Grid covering the bounding box of the samples.
  static GridSpec covering(std::span<const SpatialSample> samples, std::size_t nx, std::size_t ny);
};

struct PredictionGrid {
  GridSpec spec;
  std::vector<KrigingResult> cells;

  const KrigingResult& at(std::size_t i, std::size_t j) const { return cells[j * spec.nx + i]; }
};

struct OkInputs {
  std::vector<SpatialSample> samples;
  VariogramModel model;
};

struct CkInputs {
  MultivariateDataset dataset;
  LmcModel lmc;
};

using KrigingInputs = std::variant<OkInputs, CkInputs>;

/// Kriges every cell center. Cells whose solve fails are flagged instead of
/// aborting the grid; weights are kept only when requested.
PredictionGrid predict_grid(const KrigingInputs& inputs, const GridSpec& spec,
                            Execution execution = Execution::Parallel, bool keep_weights = false);

struct VarianceMap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;         // NaN where flagged
  std::vector<std::size_t> flagged;   // cell indices that have no usable variance

  std::size_t valid_count() const { return values.size() - flagged.size(); }
};

VarianceMap variance_map(const PredictionGrid& grid);

/// x,y,prediction,variance,flag. With `back_transform` the prediction
/// column holds 10^prediction, which is a biased estimate of the median,
/// not the mean.
void write_grid_csv(std::ostream& out, const PredictionGrid& grid, bool back_transform = false);
/// x,y,variance,flag
void write_variance_csv(std::ostream& out, const PredictionGrid& grid);

struct GridRow {
  Location location;
  double prediction = 0.0;
  double variance = 0.0;
  CellFlag flag = CellFlag::Ok;
};

std::vector<GridRow> read_grid_csv(std::istream& in);

}  // namespace cokrige
