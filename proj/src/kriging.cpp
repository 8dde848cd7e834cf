#include "cokrige/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "cokrige/csv.hpp"
#include "cokrige/error.hpp"

namespace cokrige {

std::string_view to_string(CellFlag flag) noexcept {
  switch (flag) {
    case CellFlag::Ok: return "ok";
    case CellFlag::ClampedVariance: return "clamped";
    case CellFlag::Singular: return "singular";
    case CellFlag::NegativeVariance: return "negative_variance";
  }
  return "ok";
}

CellFlag parse_cell_flag(std::string_view text) {
  if (text == "ok") return CellFlag::Ok;
  if (text == "clamped") return CellFlag::ClampedVariance;
  if (text == "singular") return CellFlag::Singular;
  if (text == "negative_variance") return CellFlag::NegativeVariance;
  throw Error(ErrorCode::MalformedArtifact, "unknown cell flag '" + std::string(text) + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_model(const VariogramModel& model) {
  if (!(model.nugget >= 0.0) || !(model.partial_sill >= 0.0) || !(model.range > 0.0) || !std::isfinite(model.range))
    throw Error(ErrorCode::InvalidModel, "variogram model needs nugget >= 0, partial sill >= 0, range > 0");
}

void require_distinct(std::span<const SpatialSample> samples, const char* what) {
  std::vector<std::pair<double, double>> keys;
  keys.reserve(samples.size());
  for (const auto& s : samples) keys.emplace_back(s.location.x, s.location.y);
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
    throw Error(ErrorCode::SingularSystem, std::string(what) + " samples contain duplicate locations");
}

/// Mean off-diagonal magnitude of the data block; the unbiasedness rows are
/// scaled by it so the condition estimate reflects the data geometry rather
/// than the units of the semivariance.
double constraint_scale(const Eigen::MatrixXd& matrix, std::size_t data_size) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data_size; ++i)
    for (std::size_t j = 0; j < data_size; ++j) sum += std::abs(matrix(i, j));
  const double pairs = static_cast<double>(data_size) * static_cast<double>(data_size - 1);
  const double scale = pairs > 0.0 ? sum / pairs : 0.0;
  return scale > 0.0 && std::isfinite(scale) ? scale : 1.0;
}

void fill_ok_block(Eigen::MatrixXd& m, std::span<const SpatialSample> samples, const VariogramModel& model) {
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = model_value(model, distance(samples[i].location, samples[j].location));
      m(i, j) = g;
      m(j, i) = g;
    }
  }
}

void fill_ck_block(Eigen::MatrixXd& m, std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                   const LmcModel& lmc) {
  const std::size_t n1 = primary.size(), n2 = secondary.size();
  auto location = [&](std::size_t k) { return k < n1 ? primary[k].location : secondary[k - n1].location; };
  auto variable = [&](std::size_t k) { return k < n1 ? 0 : 1; };
  for (std::size_t i = 0; i < n1 + n2; ++i) {
    m(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n1 + n2; ++j) {
      const double g = lmc.value(variable(i), variable(j), distance(location(i), location(j)));
      m(i, j) = g;
      m(j, i) = g;
    }
  }
}

void factorize(Eigen::PartialPivLU<Eigen::MatrixXd>& lu, const Eigen::MatrixXd& matrix, double& rcond) {
  lu.compute(matrix);
  rcond = lu.rcond();
  if (!(rcond >= kSingularRcond)) {
    std::ostringstream msg;
    msg << "kriging system is singular (reciprocal condition estimate " << rcond << ")";
    throw Error(ErrorCode::SingularSystem, msg.str());
  }
}

void finish_variance(KrigingResult& result) {
  if (!std::isfinite(result.variance) || !std::isfinite(result.prediction))
    throw Error(ErrorCode::SingularSystem, "non-finite kriging solution");
  if (result.variance < 0.0) {
    if (result.variance < -kVarianceTolerance) {
      std::ostringstream msg;
      msg << "kriging variance " << result.variance << " is negative beyond tolerance";
      throw Error(ErrorCode::NegativeVariance, msg.str());
    }
    result.variance = 0.0;
    result.flag = CellFlag::ClampedVariance;
  }
}

}  // namespace

KrigingSystem assemble_ok_system(std::span<const SpatialSample> samples, const VariogramModel& model,
                                 const Location& target) {
  require_model(model);
  const std::size_t n = samples.size();
  KrigingSystem system;
  system.constraints = 1;
  system.matrix = Eigen::MatrixXd::Zero(n + 1, n + 1);
  system.rhs = Eigen::VectorXd::Zero(n + 1);
  fill_ok_block(system.matrix, samples, model);
  for (std::size_t i = 0; i < n; ++i) {
    system.matrix(i, n) = system.matrix(n, i) = 1.0;
    system.rhs(i) = model_value(model, distance(samples[i].location, target));
    system.sample_index.emplace_back(Variable::Primary, i);
  }
  system.rhs(n) = 1.0;
  return system;
}

KrigingSystem assemble_ck_system(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                                 const LmcModel& lmc, const Location& target) {
  const std::size_t n1 = primary.size(), n2 = secondary.size(), n = n1 + n2;
  KrigingSystem system;
  system.constraints = 2;
  system.matrix = Eigen::MatrixXd::Zero(n + 2, n + 2);
  system.rhs = Eigen::VectorXd::Zero(n + 2);
  fill_ck_block(system.matrix, primary, secondary, lmc);
  for (std::size_t i = 0; i < n1; ++i) {
    system.matrix(i, n) = system.matrix(n, i) = 1.0;
    system.rhs(i) = lmc.value(0, 0, distance(primary[i].location, target));
    system.sample_index.emplace_back(Variable::Primary, i);
  }
  for (std::size_t i = 0; i < n2; ++i) {
    system.matrix(n1 + i, n + 1) = system.matrix(n + 1, n1 + i) = 1.0;
    system.rhs(n1 + i) = lmc.value(1, 0, distance(secondary[i].location, target));
    system.sample_index.emplace_back(Variable::Secondary, i);
  }
  system.rhs(n) = 1.0;
  system.rhs(n + 1) = 0.0;
  return system;
}

// ---------------------------------------------------------------------------

OrdinaryKriging::OrdinaryKriging(std::span<const SpatialSample> samples, const VariogramModel& model)
    : samples_(samples.begin(), samples.end()), model_(model) {
  if (samples_.empty()) throw Error(ErrorCode::Usage, "ordinary kriging needs at least one sample");
  require_model(model_);
  require_distinct(samples_, "primary");

  const std::size_t n = samples_.size();
  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(n + 1, n + 1);
  fill_ok_block(matrix, samples_, model_);
  constraint_scale_ = constraint_scale(matrix, n);
  for (std::size_t i = 0; i < n; ++i) matrix(i, n) = matrix(n, i) = constraint_scale_;
  factorize(lu_, matrix, rcond_);
}

KrigingResult OrdinaryKriging::predict(const Location& target, bool keep_weights) const {
  const std::size_t n = samples_.size();
  Eigen::VectorXd rhs(n + 1);
  for (std::size_t i = 0; i < n; ++i) rhs(i) = model_value(model_, distance(samples_[i].location, target));
  rhs(n) = constraint_scale_;
  const Eigen::VectorXd x = lu_.solve(rhs);

  KrigingResult result;
  result.location = target;
  double prediction = 0.0, variance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prediction += x(i) * samples_[i].value;
    variance += x(i) * rhs(i);
  }
  result.prediction = prediction;
  result.variance = variance + constraint_scale_ * x(n);
  if (keep_weights) {
    result.weights.reserve(n);
    for (std::size_t i = 0; i < n; ++i) result.weights.push_back({Variable::Primary, i, x(i)});
  }
  finish_variance(result);
  return result;
}

CoKriging::CoKriging(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                     const LmcModel& lmc)
    : primary_(primary.begin(), primary.end()), secondary_(secondary.begin(), secondary.end()), lmc_(lmc) {
  if (primary_.empty() || secondary_.empty())
    throw Error(ErrorCode::Usage, "co-kriging needs at least one primary and one secondary sample");
  if (!lmc_.is_valid()) throw Error(ErrorCode::InvalidLmc, "coregionalization matrices are not positive semi-definite");
  require_distinct(primary_, "primary");
  require_distinct(secondary_, "secondary");

  const std::size_t n1 = primary_.size(), n = n1 + secondary_.size();
  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(n + 2, n + 2);
  fill_ck_block(matrix, primary_, secondary_, lmc_);
  constraint_scale_ = constraint_scale(matrix, n);
  for (std::size_t i = 0; i < n1; ++i) matrix(i, n) = matrix(n, i) = constraint_scale_;
  for (std::size_t i = n1; i < n; ++i) matrix(i, n + 1) = matrix(n + 1, i) = constraint_scale_;
  factorize(lu_, matrix, rcond_);
}

KrigingResult CoKriging::predict(const Location& target, bool keep_weights) const {
  const std::size_t n1 = primary_.size(), n2 = secondary_.size(), n = n1 + n2;
  Eigen::VectorXd rhs(n + 2);
  for (std::size_t i = 0; i < n1; ++i) rhs(i) = lmc_.value(0, 0, distance(primary_[i].location, target));
  for (std::size_t i = 0; i < n2; ++i) rhs(n1 + i) = lmc_.value(1, 0, distance(secondary_[i].location, target));
  rhs(n) = constraint_scale_;
  rhs(n + 1) = 0.0;
  const Eigen::VectorXd x = lu_.solve(rhs);

  KrigingResult result;
  result.location = target;
  double prediction = 0.0, variance = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    prediction += x(i) * primary_[i].value;
    variance += x(i) * rhs(i);
  }
  for (std::size_t i = 0; i < n2; ++i) {
    prediction += x(n1 + i) * secondary_[i].value;
    variance += x(n1 + i) * rhs(n1 + i);
  }
  result.prediction = prediction;
  result.variance = variance + constraint_scale_ * x(n);
  if (keep_weights) {
    result.weights.reserve(n);
    for (std::size_t i = 0; i < n1; ++i) result.weights.push_back({Variable::Primary, i, x(i)});
    for (std::size_t i = 0; i < n2; ++i) result.weights.push_back({Variable::Secondary, i, x(n1 + i)});
  }
  finish_variance(result);
  return result;
}

KrigingResult solve_ok(std::span<const SpatialSample> samples, const VariogramModel& model, const Location& target) {
  return OrdinaryKriging(samples, model).predict(target);
}

KrigingResult solve_ck(const MultivariateDataset& dataset, const LmcModel& lmc, const Location& target) {
  require_colocated(dataset);
  return solve_ck(dataset.primary, dataset.secondary, lmc, target);
}

KrigingResult solve_ck(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                       const LmcModel& lmc, const Location& target) {
  return CoKriging(primary, secondary, lmc).predict(target);
}

// ---------------------------------------------------------------------------
// Grids

GridSpec GridSpec::covering(std::span<const SpatialSample> samples, std::size_t nx, std::size_t ny) {
  if (nx == 0 || ny == 0) throw Error(ErrorCode::Usage, "grid dimensions must be positive");
  const BoundingBox box = bounding_box(samples);
  const double width = box.width() > 0.0 ? box.width() : 1.0;
  const double height = box.height() > 0.0 ? box.height() : 1.0;
  GridSpec spec;
  spec.origin = {box.min_x, box.min_y};
  spec.nx = nx;
  spec.ny = ny;
  spec.dx = width / static_cast<double>(nx);
  spec.dy = height / static_cast<double>(ny);
  return spec;
}

namespace {

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual KrigingResult predict(const Location& target, bool keep_weights) const = 0;
};

template <typename Kriger>
class PredictorOf final : public Predictor {
 public:
  template <typename... Args>
  explicit PredictorOf(Args&&... args) : kriger_(std::forward<Args>(args)...) {}
  KrigingResult predict(const Location& target, bool keep_weights) const override {
    return kriger_.predict(target, keep_weights);
  }

 private:
  Kriger kriger_;
};

std::unique_ptr<Predictor> make_predictor(const KrigingInputs& inputs) {
  if (const auto* ok = std::get_if<OkInputs>(&inputs))
    return std::make_unique<PredictorOf<OrdinaryKriging>>(ok->samples, ok->model);
  const auto& ck = std::get<CkInputs>(inputs);
  require_colocated(ck.dataset);
  return std::make_unique<PredictorOf<CoKriging>>(ck.dataset.primary, ck.dataset.secondary, ck.lmc);
}

KrigingResult flagged_cell(const Location& location, CellFlag flag) { return {location, kNaN, kNaN, {}, flag}; }

}  // namespace

PredictionGrid predict_grid(const KrigingInputs& inputs, const GridSpec& spec, Execution execution,
                            bool keep_weights) {
  if (spec.nx == 0 || spec.ny == 0 || !(spec.dx > 0.0) || !(spec.dy > 0.0))
    throw Error(ErrorCode::Usage, "grid needs positive cell counts and spacing");

  PredictionGrid grid;
  grid.spec = spec;
  grid.cells.resize(spec.cell_count());
  auto center = [&](std::size_t index) { return spec.cell_center(index % spec.nx, index / spec.nx); };

  std::unique_ptr<Predictor> predictor;
  try {
    predictor = make_predictor(inputs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSystem) throw;
    for (std::size_t index = 0; index < grid.cells.size(); ++index)
      grid.cells[index] = flagged_cell(center(index), CellFlag::Singular);
    return grid;
  }

  auto solve_cell = [&](std::size_t index) {
    const Location location = center(index);
    try {
      grid.cells[index] = predictor->predict(location, keep_weights);
    } catch (const Error& e) {
      grid.cells[index] = flagged_cell(
          location, e.code() == ErrorCode::NegativeVariance ? CellFlag::NegativeVariance : CellFlag::Singular);
    }
  };

  const auto count = static_cast<std::ptrdiff_t>(grid.cells.size());
  if (execution == Execution::Serial) {
    for (std::ptrdiff_t index = 0; index < count; ++index) solve_cell(static_cast<std::size_t>(index));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t index = 0; index < count; ++index) solve_cell(static_cast<std::size_t>(index));
  }
  return grid;
}

VarianceMap variance_map(const PredictionGrid& grid) {
  VarianceMap map;
  map.nx = grid.spec.nx;
  map.ny = grid.spec.ny;
  map.values.resize(grid.cells.size(), kNaN);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto& cell = grid.cells[i];
    if (cell.flag == CellFlag::Ok || cell.flag == CellFlag::ClampedVariance)
      map.values[i] = cell.variance;
    else
      map.flagged.push_back(i);
  }
  return map;
}

void write_grid_csv(std::ostream& out, const PredictionGrid& grid, bool back_transform) {
  out << "x,y,prediction,variance,flag\n";
  for (const auto& cell : grid.cells) {
    const double prediction = back_transform ? std::pow(10.0, cell.prediction) : cell.prediction;
    out << csv::format_double(cell.location.x) << ',' << csv::format_double(cell.location.y) << ','
        << csv::format_double(prediction) << ',' << csv::format_double(cell.variance) << ',' << to_string(cell.flag)
        << '\n';
  }
}

void write_variance_csv(std::ostream& out, const PredictionGrid& grid) {
  out << "x,y,variance,flag\n";
  for (const auto& cell : grid.cells)
    out << csv::format_double(cell.location.x) << ',' << csv::format_double(cell.location.y) << ','
        << csv::format_double(cell.variance) << ',' << to_string(cell.flag) << '\n';
}

std::vector<GridRow> read_grid_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const auto x = table.column("x"), y = table.column("y");
  const auto prediction = table.column("prediction"), variance = table.column("variance"), flag = table.column("flag");
  if (!x || !y || (!prediction && !variance))
    throw Error(ErrorCode::MalformedArtifact, "grid CSV lacks x,y and a value column");
  std::vector<GridRow> rows;
  for (const auto& row : table.rows) {
    auto field = [&](std::optional<std::size_t> col) -> std::optional<double> {
      if (!col) return kNaN;
      if (*col >= row.size()) return std::nullopt;
      return csv::parse_double(row[*col]);
    };
    GridRow r;
    const auto fx = field(x), fy = field(y), fp = field(prediction), fv = field(variance);
    if (!fx || !fy || !fp || !fv) throw Error(ErrorCode::MalformedArtifact, "unparseable grid row");
    r.location = {*fx, *fy};
    r.prediction = *fp;
    r.variance = *fv;
    if (flag && *flag < row.size()) r.flag = parse_cell_flag(csv::trim(row[*flag]));
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::MalformedArtifact, "grid CSV has no rows");
  return rows;
}

}  // namespace cokrige
