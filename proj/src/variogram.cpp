#include "cokrige/variogram.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "cokrige/csv.hpp"
#include "cokrige/error.hpp"

namespace cokrige {

std::string_view to_string(Structure structure) noexcept {
  switch (structure) {
    case Structure::Spherical: return "spherical";
    case Structure::Exponential: return "exponential";
    case Structure::Gaussian: return "gaussian";
  }
  return "spherical";
}

Structure parse_structure(std::string_view name) {
  if (name == "spherical" || name == "sph") return Structure::Spherical;
  if (name == "exponential" || name == "exp") return Structure::Exponential;
  if (name == "gaussian" || name == "gau") return Structure::Gaussian;
  throw Error(ErrorCode::Usage, "unknown structure '" + std::string(name) + "'", std::string(name));
}

double structure_shape(Structure structure, double t) noexcept {
  switch (structure) {
    case Structure::Spherical: return t < 1.0 ? 1.5 * t - 0.5 * t * t * t : 1.0;
    case Structure::Exponential: return 1.0 - std::exp(-3.0 * t);
    case Structure::Gaussian: return 1.0 - std::exp(-3.0 * t * t);
  }
  return 0.0;
}

double model_value(const VariogramModel& model, double h) noexcept {
  if (h <= 0.0) return 0.0;
  return model.nugget + model.partial_sill * structure_shape(model.structure, h / model.range);
}

double LmcModel::value(int a, int b, double h) const noexcept {
  if (h <= 0.0) return 0.0;
  return nugget(a, b) + sill(a, b) * structure_shape(structure, h / range);
}

double LmcModel::covariance(int a, int b, double h) const noexcept {
  if (h <= 0.0) return nugget(a, b) + sill(a, b);
  return sill(a, b) * (1.0 - structure_shape(structure, h / range));
}

VariogramModel LmcModel::direct(int a) const { return {nugget(a, a), structure, sill(a, a), range}; }

namespace {

bool psd(const Eigen::Matrix2d& m, double tolerance) {
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
  return eig.eigenvalues().minCoeff() >= -tolerance;
}

}  // namespace

bool LmcModel::is_valid(double tolerance) const {
  return range > 0.0 && std::isfinite(range) && psd(nugget, tolerance) && psd(sill, tolerance);
}

double default_cutoff(std::span<const SpatialSample> samples) { return bounding_box(samples).diagonal() / 3.0; }

// ---------------------------------------------------------------------------
// Empirical variograms
//
// Each row i accumulates its pairs (i, j > i) into row-local bins; the rows
// are then added into the totals in increasing i. The serial and parallel
// kernels share that order, so they agree bit for bit.

namespace {

struct BinAccum {
  double sum = 0.0;
  double lag_sum = 0.0;
  std::size_t count = 0;
};

struct PairData {
  std::span<const SpatialSample> u;
  std::span<const SpatialSample> v;
  double cutoff;
  double width;
  int n_bins;
};

void accumulate_row(const PairData& data, std::size_t i, BinAccum* row) {
  const std::size_t n = data.u.size();
  const Location pi = data.u[i].location;
  const double ui = data.u[i].value;
  const double vi = data.v[i].value;
  for (std::size_t j = i + 1; j < n; ++j) {
    const double d = distance(pi, data.u[j].location);
    if (d <= 0.0 || d > data.cutoff) continue;
    const int b = std::min(static_cast<int>(d / data.width), data.n_bins - 1);
    row[b].sum += (ui - data.u[j].value) * (vi - data.v[j].value);
    row[b].lag_sum += d;
    ++row[b].count;
  }
}

void add_row(std::vector<BinAccum>& totals, const BinAccum* row) {
  for (std::size_t b = 0; b < totals.size(); ++b) {
    totals[b].sum += row[b].sum;
    totals[b].lag_sum += row[b].lag_sum;
    totals[b].count += row[b].count;
  }
}

std::vector<BinAccum> pairs_serial(const PairData& data) {
  const auto nb = static_cast<std::size_t>(data.n_bins);
  std::vector<BinAccum> totals(nb), row(nb);
  for (std::size_t i = 0; i < data.u.size(); ++i) {
    std::fill(row.begin(), row.end(), BinAccum{});
    accumulate_row(data, i, row.data());
    add_row(totals, row.data());
  }
  return totals;
}

std::vector<BinAccum> pairs_parallel(const PairData& data) {
  const auto nb = static_cast<std::size_t>(data.n_bins);
  const auto n = static_cast<std::ptrdiff_t>(data.u.size());
  std::vector<BinAccum> rows(data.u.size() * nb);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) accumulate_row(data, static_cast<std::size_t>(i), &rows[i * nb]);

  std::vector<BinAccum> totals(nb);
  for (std::size_t i = 0; i < data.u.size(); ++i) add_row(totals, &rows[i * nb]);
  return totals;
}

EmpiricalVariogram estimate(const PairData& data, VariogramKind kind, Execution execution) {
  if (data.u.size() < 2) throw Error(ErrorCode::NoPairsWithinCutoff, "need at least two samples");
  if (!(data.cutoff > 0.0) || !std::isfinite(data.cutoff)) throw Error(ErrorCode::Usage, "cutoff must be positive");
  if (data.n_bins < 1) throw Error(ErrorCode::Usage, "n_bins must be at least 1");

  const auto totals = execution == Execution::Serial ? pairs_serial(data) : pairs_parallel(data);

  EmpiricalVariogram out;
  out.cutoff = data.cutoff;
  out.bin_width = data.width;
  out.kind = kind;
  for (const auto& bin : totals) {
    if (bin.count == 0) continue;
    const double n = static_cast<double>(bin.count);
    out.bins.push_back({bin.lag_sum / n, bin.sum / (2.0 * n), bin.count});
  }
  if (out.bins.empty()) throw Error(ErrorCode::NoPairsWithinCutoff, "no pair of samples within the cutoff");
  return out;
}

}  // namespace

EmpiricalVariogram empirical_variogram(std::span<const SpatialSample> samples, double cutoff, int n_bins,
                                       Execution execution) {
  const PairData data{samples, samples, cutoff, cutoff / std::max(n_bins, 1), n_bins};
  return estimate(data, VariogramKind::Direct, execution);
}

EmpiricalVariogram empirical_cross_variogram(const MultivariateDataset& dataset, double cutoff, int n_bins,
                                             Execution execution) {
  require_colocated(dataset);
  const PairData data{dataset.primary, dataset.secondary, cutoff, cutoff / std::max(n_bins, 1), n_bins};
  return estimate(data, VariogramKind::Cross, execution);
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

constexpr int kScanPoints = 64;
constexpr double kBracketTolerance = 1e-10;
constexpr int kMaxIterations = 500;

struct Coefficients {
  double nugget = 0.0;
  double partial_sill = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

double weight(const LagBin& bin) { return static_cast<double>(bin.pair_count) / (bin.lag * bin.lag); }

double objective_at(const EmpiricalVariogram& e, Structure structure, double range, double nugget, double psill) {
  double sum = 0.0;
  for (const auto& bin : e.bins) {
    const double r = bin.gamma - nugget - psill * structure_shape(structure, bin.lag / range);
    sum += weight(bin) * r * r;
  }
  return sum;
}

/// Linear WLS for (nugget, partial sill) at a fixed range. With
/// `non_negative` the four active sets of the two-variable NNLS problem are
/// compared directly.
Coefficients coefficients_at(const EmpiricalVariogram& e, Structure structure, double range, bool non_negative) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
  for (const auto& bin : e.bins) {
    const double w = weight(bin);
    const double s = structure_shape(structure, bin.lag / range);
    s0 += w;
    s1 += w * s;
    s2 += w * s * s;
    t0 += w * bin.gamma;
    t1 += w * s * bin.gamma;
  }

  std::array<Coefficients, 4> candidates{};
  int count = 0;
  auto consider = [&](double a, double p) {
    candidates[count++] = {a, p, objective_at(e, structure, range, a, p)};
  };

  const double det = s0 * s2 - s1 * s1;
  if (det > 1e-12 * s0 * s2) {
    const double a = (s2 * t0 - s1 * t1) / det;
    const double p = (s0 * t1 - s1 * t0) / det;
    if (!non_negative || (a >= 0.0 && p >= 0.0)) consider(a, p);
  }
  if (non_negative) {
    consider(std::max(0.0, t0 / s0), 0.0);
    if (s2 > 0.0) consider(0.0, std::max(0.0, t1 / s2));
  } else if (count == 0) {
    consider(t0 / s0, 0.0);
  }

  Coefficients best;
  for (int i = 0; i < count; ++i)
    if (candidates[i].objective < best.objective) best = candidates[i];
  return best;
}

void require_bins(const EmpiricalVariogram& e, const char* what) {
  if (e.bins.size() < 3)
    throw Error(ErrorCode::TooFewBins, std::string(what) + " has " + std::to_string(e.bins.size()) +
                                           " non-empty bins, need at least 3");
  for (const auto& bin : e.bins)
    if (!(bin.lag > 0.0)) throw Error(ErrorCode::InvalidModel, "variogram bin with non-positive lag");
}

}  // namespace

double wls_objective(const EmpiricalVariogram& empirical, const VariogramModel& model) {
  return objective_at(empirical, model.structure, model.range, model.nugget, model.partial_sill);
}

ModelFit fit_model(const EmpiricalVariogram& empirical, Structure structure) {
  return fit_model(empirical, structure, VariogramModel{0.0, structure, 0.0, 0.0});
}

ModelFit fit_model(const EmpiricalVariogram& empirical, Structure structure, const VariogramModel& initial) {
  require_bins(empirical, "empirical variogram");

  const double first_lag = empirical.bins.front().lag;
  const double last_lag = std::max(empirical.bins.back().lag, empirical.cutoff);
  const double lo = 0.25 * first_lag;
  const double hi = 3.0 * last_lag;

  auto profile = [&](double range) { return coefficients_at(empirical, structure, range, true).objective; };

  // Coarse geometric scan to bracket the global minimum.
  std::vector<double> grid(kScanPoints);
  for (int k = 0; k < kScanPoints; ++k)
    grid[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (kScanPoints - 1));
  if (initial.range > lo && initial.range < hi) {
    grid.push_back(initial.range);
    std::sort(grid.begin(), grid.end());
  }
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double value = profile(grid[k]);
    if (value < best_value) {
      best_value = value;
      best = k;
    }
  }
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];

  // Golden-section search inside the bracket.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = profile(c), fd = profile(d);
  int iterations = 0;
  bool converged = false;
  while (iterations < kMaxIterations) {
    if (b - a <= kBracketTolerance * 0.5 * (a + b)) {
      converged = true;
      break;
    }
    ++iterations;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = profile(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = profile(d);
    }
  }

  // Keep whichever of the bracket midpoint and the scan winner is better.
  double range = 0.5 * (a + b);
  Coefficients coef = coefficients_at(empirical, structure, range, true);
  if (best_value < coef.objective) {
    range = grid[best];
    coef = coefficients_at(empirical, structure, range, true);
  }

  ModelFit fit;
  fit.model = {coef.nugget, structure, coef.partial_sill, range};
  fit.objective = coef.objective;
  fit.converged = converged;
  fit.iterations = iterations;
  const double total = coef.nugget + coef.partial_sill;
  fit.degenerate_range = !(coef.partial_sill > 1e-9 * total) || range <= lo * 1.001 || range >= hi * 0.999;
  return fit;
}

Eigen::Matrix2d project_psd(const Eigen::Matrix2d& matrix) {
  const Eigen::Matrix2d sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sym);
  const Eigen::Vector2d values = eig.eigenvalues().cwiseMax(0.0);
  Eigen::Matrix2d out = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

LmcFit fit_lmc(const EmpiricalVariogram& direct_primary, const EmpiricalVariogram& direct_secondary,
               const EmpiricalVariogram& cross, Structure structure) {
  require_bins(direct_primary, "primary variogram");
  require_bins(direct_secondary, "secondary variogram");
  require_bins(cross, "cross variogram");

  const ModelFit primary = fit_model(direct_primary, structure);
  const double range = primary.model.range;
  const Coefficients secondary = coefficients_at(direct_secondary, structure, range, true);
  const Coefficients mixed = coefficients_at(cross, structure, range, false);

  LmcFit fit;
  fit.converged = primary.converged;
  fit.model.structure = structure;
  fit.model.range = range;
  fit.model.nugget << primary.model.nugget, mixed.nugget, mixed.nugget, secondary.nugget;
  fit.model.sill << primary.model.partial_sill, mixed.partial_sill, mixed.partial_sill, secondary.partial_sill;
  fit.objective = primary.objective + secondary.objective + mixed.objective;

  // A coefficient may move by at most half of max(|coefficient|, 5% of the
  // larger total sill) during projection.
  const double scale = 0.05 * std::max(fit.model.nugget(0, 0) + fit.model.sill(0, 0),
                                       fit.model.nugget(1, 1) + fit.model.sill(1, 1));
  auto enforce = [&](Eigen::Matrix2d& m, const char* name) {
    if (psd(m, 1e-10)) return;
    const Eigen::Matrix2d projected = project_psd(m);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double change = std::abs(projected(i, j) - m(i, j));
        if (change > 0.5 * std::max(std::abs(m(i, j)), scale)) {
          std::ostringstream msg;
          msg << name << " matrix violates Cauchy-Schwarz: cross " << m(0, 1) << " vs direct " << m(0, 0)
              << ", " << m(1, 1);
          throw Error(ErrorCode::InfeasibleFit, msg.str());
        }
      }
    m = projected;
    fit.projected = true;
  };
  enforce(fit.model.nugget, "nugget");
  enforce(fit.model.sill, "sill");
  if (fit.projected) {
    fit.objective = wls_objective(direct_primary, fit.model.direct(0)) +
                    wls_objective(direct_secondary, fit.model.direct(1)) +
                    objective_at(cross, structure, range, fit.model.nugget(0, 1), fit.model.sill(0, 1));
  }
  return fit;
}

RangeDiagnostic range_diagnostic(std::span<const SpatialSample> full_secondary,
                                 std::span<const SpatialSample> colocated_secondary, double cutoff, int n_bins,
                                 Structure structure) {
  if (full_secondary.size() < 3 || colocated_secondary.size() < 3)
    throw Error(ErrorCode::TooFewBins, "range diagnostic needs at least 3 points per sample set");
  const ModelFit full = fit_model(empirical_variogram(full_secondary, cutoff, n_bins), structure);
  const ModelFit colocated = fit_model(empirical_variogram(colocated_secondary, cutoff, n_bins), structure);
  return {full.model.range, colocated.model.range};
}

// ---------------------------------------------------------------------------
// Text artifacts

void write_variogram_csv(std::ostream& out, const EmpiricalVariogram& empirical) {
  out << "# kind=" << (empirical.kind == VariogramKind::Direct ? "direct" : "cross")
      << " cutoff=" << csv::format_double(empirical.cutoff)
      << " bin_width=" << csv::format_double(empirical.bin_width) << '\n';
  out << "lag,gamma,pair_count\n";
  for (const auto& bin : empirical.bins)
    out << csv::format_double(bin.lag) << ',' << csv::format_double(bin.gamma) << ',' << bin.pair_count << '\n';
}

EmpiricalVariogram read_variogram_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const auto lag = table.column("lag"), gamma = table.column("gamma"), count = table.column("pair_count");
  if (!lag || !gamma || !count) throw Error(ErrorCode::MalformedArtifact, "variogram CSV lacks lag,gamma,pair_count");
  if (table.rows.empty()) throw Error(ErrorCode::MalformedArtifact, "variogram CSV has no bins");

  EmpiricalVariogram out;
  for (const auto& comment : table.comments) {
    std::istringstream tokens(comment);
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
      if (key == "kind") out.kind = value == "cross" ? VariogramKind::Cross : VariogramKind::Direct;
      if (key == "cutoff") out.cutoff = csv::parse_double(value).value_or(0.0);
      if (key == "bin_width") out.bin_width = csv::parse_double(value).value_or(0.0);
    }
  }
  for (const auto& row : table.rows) {
    const auto max_col = std::max({*lag, *gamma, *count});
    if (row.size() <= max_col) throw Error(ErrorCode::MalformedArtifact, "short variogram row");
    const auto h = csv::parse_double(row[*lag]);
    const auto g = csv::parse_double(row[*gamma]);
    const auto c = csv::parse_double(row[*count]);
    if (!h || !g || !c || *c < 1) throw Error(ErrorCode::MalformedArtifact, "unparseable variogram row");
    if (!out.bins.empty() && !(*h > out.bins.back().lag))
      throw Error(ErrorCode::MalformedArtifact, "variogram lags not increasing");
    out.bins.push_back({*h, *g, static_cast<std::size_t>(*c)});
  }
  if (out.cutoff <= 0.0) out.cutoff = out.bins.back().lag;
  return out;
}

void write_model_text(std::ostream& out, const VariogramModel& model) {
  out << "model = variogram\n"
      << "structure = " << to_string(model.structure) << '\n'
      << "range = " << csv::format_double(model.range) << '\n'
      << "nugget = " << csv::format_double(model.nugget) << '\n'
      << "partial_sill = " << csv::format_double(model.partial_sill) << '\n';
}

void write_model_text(std::ostream& out, const LmcModel& model) {
  out << "model = lmc\n"
      << "structure = " << to_string(model.structure) << '\n'
      << "range = " << csv::format_double(model.range) << '\n'
      << "nugget.primary = " << csv::format_double(model.nugget(0, 0)) << '\n'
      << "nugget.cross = " << csv::format_double(model.nugget(0, 1)) << '\n'
      << "nugget.secondary = " << csv::format_double(model.nugget(1, 1)) << '\n'
      << "sill.primary = " << csv::format_double(model.sill(0, 0)) << '\n'
      << "sill.cross = " << csv::format_double(model.sill(0, 1)) << '\n'
      << "sill.secondary = " << csv::format_double(model.sill(1, 1)) << '\n';
}

ModelFile read_model_text(std::istream& in) {
  const auto entries = csv::read_key_values(in);
  auto find = [&](const std::string& key) -> std::optional<std::string> {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    return std::nullopt;
  };
  auto number = [&](const std::string& key) {
    const auto text = find(key);
    const auto value = text ? csv::parse_double(*text) : std::nullopt;
    if (!value) throw Error(ErrorCode::MalformedArtifact, "model file lacks numeric '" + key + "'", key);
    return *value;
  };

  const auto kind = find("model");
  if (!kind) throw Error(ErrorCode::MalformedArtifact, "model file lacks 'model'");
  const auto structure_name = find("structure");
  if (!structure_name) throw Error(ErrorCode::MalformedArtifact, "model file lacks 'structure'");
  Structure structure;
  try {
    structure = parse_structure(*structure_name);
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedArtifact, "unknown structure in model file");
  }

  ModelFile file;
  if (*kind == "variogram") {
    file.variogram = VariogramModel{number("nugget"), structure, number("partial_sill"), number("range")};
  } else if (*kind == "lmc") {
    LmcModel lmc;
    lmc.structure = structure;
    lmc.range = number("range");
    lmc.nugget << number("nugget.primary"), number("nugget.cross"), number("nugget.cross"),
        number("nugget.secondary");
    lmc.sill << number("sill.primary"), number("sill.cross"), number("sill.cross"), number("sill.secondary");
    file.lmc = lmc;
  } else {
    throw Error(ErrorCode::MalformedArtifact, "unknown model kind '" + *kind + "'");
  }
  return file;
}

}  // namespace cokrige
