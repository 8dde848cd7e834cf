#include "cokrige/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "cokrige/data_model.hpp"
#include "cokrige/error.hpp"
#include "cokrige/wpi.hpp"

namespace cokrige {

namespace {

/// Square-root factor F with F F^T = m, for a symmetric PSD coefficient matrix.
Eigen::MatrixXd coefficient_factor(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols() || !m.isApprox(m.transpose(), 1e-12))
    throw Error(ErrorCode::NonPositiveDefiniteCovariance, std::string(name) + " matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw Error(ErrorCode::NonPositiveDefiniteCovariance, std::string(name) + " matrix is not positive semi-definite");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

/// Correlated standard-normal draws with correlation 1 - s(h / range).
class StructureSampler {
 public:
  StructureSampler(std::span<const Location> locations, Structure structure, double range) {
    const auto n = static_cast<Eigen::Index>(locations.size());
    Eigen::MatrixXd corr(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      corr(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double h = distance(locations[i], locations[j]);
        corr(i, j) = corr(j, i) = h > 0.0 ? 1.0 - structure_shape(structure, h / range) : 1.0;
      }
    }
    llt_.compute(corr);
    if (llt_.info() == Eigen::Success) return;

    // Numerically semi-definite (e.g. gaussian structure, close points).
    ldlt_.compute(corr);
    if (ldlt_.info() != Eigen::Success || ldlt_.vectorD().minCoeff() < -1e-8)
      throw Error(ErrorCode::NonPositiveDefiniteCovariance, "structure correlation matrix is not positive semi-definite");
    use_ldlt_ = true;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& z) const {
    if (!use_ldlt_) return llt_.matrixL() * z;
    Eigen::VectorXd y = ldlt_.vectorD().cwiseMax(0.0).cwiseSqrt().cwiseProduct(z);
    y = ldlt_.matrixL() * y;
    return ldlt_.transpositionsP().transpose() * y;
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  bool use_ldlt_ = false;
};

Eigen::VectorXd normal_vector(std::mt19937_64& engine, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(engine);
  return z;
}

}  // namespace

std::vector<std::vector<double>> simulate_coregionalized(std::span<const Location> locations, Structure structure,
                                                         double range, const Eigen::MatrixXd& nugget,
                                                         const Eigen::MatrixXd& sill, std::uint64_t seed) {
  const Eigen::Index k = sill.rows();
  if (nugget.rows() != k || nugget.cols() != k || sill.cols() != k)
    throw Error(ErrorCode::Usage, "nugget and sill matrices must be square and of equal size");
  const Eigen::MatrixXd sill_factor = coefficient_factor(sill, "sill");
  const Eigen::MatrixXd nugget_factor = coefficient_factor(nugget, "nugget");
  const bool structured = sill_factor.cwiseAbs().maxCoeff() > 0.0;
  if (structured && !(range > 0.0)) throw Error(ErrorCode::Usage, "structured field needs a positive range");

  const auto n = static_cast<Eigen::Index>(locations.size());
  std::mt19937_64 engine(seed);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, k);
  if (structured) {
    const StructureSampler sampler(locations, structure, range);
    for (Eigen::Index f = 0; f < k; ++f) {
      const Eigen::VectorXd factor = sampler.apply(normal_vector(engine, n));
      for (Eigen::Index a = 0; a < k; ++a) values.col(a) += sill_factor(a, f) * factor;
    }
  } else {
    for (Eigen::Index f = 0; f < k; ++f) normal_vector(engine, n);  // keep the stream aligned
  }
  for (Eigen::Index f = 0; f < k; ++f) {
    const Eigen::VectorXd noise = normal_vector(engine, n);
    for (Eigen::Index a = 0; a < k; ++a) values.col(a) += nugget_factor(a, f) * noise;
  }

  std::vector<std::vector<double>> out(static_cast<std::size_t>(k), std::vector<double>(locations.size()));
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index i = 0; i < n; ++i) out[a][i] = values(i, a);
  return out;
}

namespace {

std::vector<Location> uniform_locations(const BoundingBox& box, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> ux(box.min_x, box.max_x), uy(box.min_y, box.max_y);
  std::vector<Location> out(n);
  for (auto& loc : out) {
    loc.x = ux(engine);
    loc.y = uy(engine);
  }
  return out;
}

constexpr std::uint64_t kFieldStream = 0x5851F42D4C957F2DULL;
constexpr std::uint64_t kAttributeStream = 0x14057B7EF767814FULL;

}  // namespace

MultivariateDataset generate_field(const SynthSpec& spec) {
  if (spec.n_points < 2) throw Error(ErrorCode::Usage, "synthetic field needs at least two points");
  if (!(spec.box.width() > 0.0) || !(spec.box.height() > 0.0))
    throw Error(ErrorCode::Usage, "synthetic field needs a non-degenerate bounding box");
  if (!spec.lmc.is_valid()) throw Error(ErrorCode::NonPositiveDefiniteCovariance, "generating LMC is not valid");

  const auto locations = uniform_locations(spec.box, spec.n_points, spec.seed);
  const auto values = simulate_coregionalized(locations, spec.lmc.structure, spec.lmc.range, spec.lmc.nugget,
                                              spec.lmc.sill, spec.seed ^ kFieldStream);
  MultivariateDataset out;
  out.secondary_name = spec.secondary_name;
  out.colocated = true;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    out.primary.push_back({locations[i], spec.means[0] + values[0][i]});
    out.secondary.push_back({locations[i], spec.means[1] + values[1][i]});
  }
  return out;
}

BundledModel bundled_model() {
  BundledModel m;
  m.structure = Structure::Spherical;
  m.range = 9000.0;
  m.box = {0.0, 0.0, 30000.0, 20000.0};
  m.means = {9.0, 6.8, 6.9};

  // Correlations: WPI-fluid 0.7, WPI-proppant 0.4, fluid-proppant 0.5.
  Eigen::Matrix3d corr;
  corr << 1.0, 0.7, 0.4, 0.7, 1.0, 0.5, 0.4, 0.5, 1.0;
  const Eigen::Vector3d nugget_sd = Eigen::Vector3d(0.020, 0.015, 0.020).cwiseSqrt();
  const Eigen::Vector3d sill_sd = Eigen::Vector3d(0.060, 0.050, 0.050).cwiseSqrt();
  m.nugget = nugget_sd.asDiagonal() * corr * nugget_sd.asDiagonal();
  m.sill = sill_sd.asDiagonal() * corr * sill_sd.asDiagonal();
  return m;
}

std::vector<WellRecord> bundled_wells(std::uint64_t seed) {
  const BundledModel model = bundled_model();
  auto locations = uniform_locations(model.box, kBundledWells, seed);
  for (auto& loc : locations) {
    loc.x = std::round(loc.x * 100.0) / 100.0;
    loc.y = std::round(loc.y * 100.0) / 100.0;
  }
  const auto values =
      simulate_coregionalized(locations, model.structure, model.range, model.nugget, model.sill, seed ^ kFieldStream);

  std::mt19937_64 engine(seed ^ kAttributeStream);
  std::uniform_real_distribution<double> gradient(0.75, 0.95), depth(11000.0, 15000.0);
  std::vector<WellRecord> wells;
  wells.reserve(kBundledWells);
  for (std::size_t i = 0; i < kBundledWells; ++i) {
    WellRecord w;
    char id[16];
    std::snprintf(id, sizeof(id), "W%04zu", i + 1);
    w.well_id = id;
    w.location = locations[i];
    const double g = std::round(gradient(engine) * 1000.0) / 1000.0;
    const double tvd = std::round(depth(engine));
    const double wpi = std::pow(10.0, model.means[0] + values[0][i]);
    w.frac_gradient = g;
    w.tvd = tvd;
    w.avg_rate_90d = wpi / (kProductionDays * g * tvd);
    w.fluid_volume = std::pow(10.0, model.means[1] + values[1][i]);
    w.proppant_volume = std::pow(10.0, model.means[2] + values[2][i]);
    wells.push_back(std::move(w));
  }
  return wells;
}

std::filesystem::path make_bundled_dataset(const std::filesystem::path& directory, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + directory.string() + "'", directory.string());
  const auto path = directory / "wells.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'", path.string());
  const auto wells = bundled_wells(seed);
  write_wells_csv(out, wells);
  if (!out) throw Error(ErrorCode::IoFailure, "write to '" + path.string() + "' failed", path.string());
  return path;
}

}  // namespace cokrige
