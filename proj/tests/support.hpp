#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cokrige/error.hpp"
#include "cokrige/kriging.hpp"
#include "cokrige/types.hpp"
#include "cokrige/variogram.hpp"

namespace testing {

using cokrige::Location;
using cokrige::SpatialSample;

// Shape functions written out again so the oracle shares nothing with the
// production model code.
inline double shape(cokrige::Structure s, double h, double range) {
  if (h <= 0.0) return 0.0;
  const double t = h / range;
  switch (s) {
    case cokrige::Structure::Spherical: return t >= 1.0 ? 1.0 : 1.5 * t - 0.5 * t * t * t;
    case cokrige::Structure::Exponential: return 1.0 - std::exp(-3.0 * t);
    case cokrige::Structure::Gaussian: return 1.0 - std::exp(-3.0 * t * t);
  }
  return 0.0;
}

// Covariance C(h) = nugget + psill at h = 0, psill * (1 - shape) beyond.
inline double cov(double nugget, double psill, cokrige::Structure s, double range, double h) {
  if (h == 0.0) return nugget + psill;
  return psill * (1.0 - shape(s, h, range));
}

inline double dist(const Location& a, const Location& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Dense Gaussian elimination with partial pivoting on a row-major copy.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw std::runtime_error("oracle: singular");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

struct OracleResult {
  double prediction = 0.0;
  double variance = 0.0;
  std::vector<double> primary_weights;
  std::vector<double> secondary_weights;
};

// Ordinary kriging in covariance form.
inline OracleResult oracle_ok(const std::vector<SpatialSample>& s, const cokrige::VariogramModel& m,
                              const Location& target) {
  const std::size_t n = s.size();
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
  std::vector<double> b(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      a[i][j] = cov(m.nugget, m.partial_sill, m.structure, m.range, dist(s[i].location, s[j].location));
    a[i][n] = 1.0;
    a[n][i] = 1.0;
    b[i] = cov(m.nugget, m.partial_sill, m.structure, m.range, dist(s[i].location, target));
  }
  b[n] = 1.0;
  const auto x = gauss_solve(a, b);
  OracleResult r;
  r.variance = m.nugget + m.partial_sill - x[n];
  for (std::size_t i = 0; i < n; ++i) {
    r.primary_weights.push_back(x[i]);
    r.prediction += x[i] * s[i].value;
    r.variance -= x[i] * b[i];
  }
  return r;
}

// Ordinary co-kriging in covariance form, primary weights sum to 1 and
// secondary weights sum to 0.
inline OracleResult oracle_ck(const std::vector<SpatialSample>& p, const std::vector<SpatialSample>& q,
                              const cokrige::LmcModel& lmc, const Location& target) {
  const std::size_t n1 = p.size(), n2 = q.size(), n = n1 + n2 + 2;
  auto c = [&](int a, int b, const Location& u, const Location& v) {
    return cov(lmc.nugget(a, b), lmc.sill(a, b), lmc.structure, lmc.range, dist(u, v));
  };
  auto loc = [&](std::size_t k) { return k < n1 ? p[k].location : q[k - n1].location; };
  auto var = [&](std::size_t k) { return k < n1 ? 0 : 1; };
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n1 + n2; ++i) {
    for (std::size_t j = 0; j < n1 + n2; ++j) a[i][j] = c(var(i), var(j), loc(i), loc(j));
    const std::size_t constraint = n1 + n2 + static_cast<std::size_t>(var(i));
    a[i][constraint] = 1.0;
    a[constraint][i] = 1.0;
    b[i] = c(var(i), 0, loc(i), target);
  }
  b[n1 + n2] = 1.0;
  const auto x = gauss_solve(a, b);
  OracleResult r;
  r.variance = lmc.nugget(0, 0) + lmc.sill(0, 0) - x[n1 + n2];
  for (std::size_t i = 0; i < n1 + n2; ++i) {
    const double value = i < n1 ? p[i].value : q[i - n1].value;
    (i < n1 ? r.primary_weights : r.secondary_weights).push_back(x[i]);
    r.prediction += x[i] * value;
    r.variance -= x[i] * b[i];
  }
  return r;
}

// Random points in [0, side]^2 kept at least `min_gap` apart.
inline std::vector<Location> random_locations(std::mt19937_64& rng, std::size_t n, double side = 100.0,
                                              double min_gap = 2.0) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Location> out;
  while (out.size() < n) {
    const Location c{u(rng), u(rng)};
    bool ok = true;
    for (const auto& o : out) ok = ok && dist(o, c) >= min_gap;
    if (ok) out.push_back(c);
  }
  return out;
}

inline std::vector<SpatialSample> random_samples(std::mt19937_64& rng, std::size_t n, double side = 100.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<SpatialSample> out;
  for (const auto& l : random_locations(rng, n, side)) out.push_back({l, z(rng)});
  return out;
}

inline cokrige::Structure random_structure(std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? cokrige::Structure::Spherical
                                                            : cokrige::Structure::Exponential;
}

inline cokrige::VariogramModel random_model(std::mt19937_64& rng, bool with_nugget) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  cokrige::VariogramModel m;
  m.structure = random_structure(rng);
  m.range = 20.0 + 130.0 * u(rng);
  m.partial_sill = 0.5 + 1.5 * u(rng);
  m.nugget = with_nugget ? 0.5 * u(rng) : 0.0;
  return m;
}

// Random PSD 2x2 coefficient matrix with correlation in [-0.9, 0.9].
inline Eigen::Matrix2d random_psd(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = lo + (hi - lo) * u(rng), b = lo + (hi - lo) * u(rng);
  const double rho = -0.9 + 1.8 * u(rng);
  Eigen::Matrix2d m;
  m << a, rho * std::sqrt(a * b), rho * std::sqrt(a * b), b;
  return m;
}

inline cokrige::LmcModel random_lmc(std::mt19937_64& rng, bool with_nugget) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  cokrige::LmcModel lmc;
  lmc.structure = random_structure(rng);
  lmc.range = 20.0 + 130.0 * u(rng);
  lmc.sill = random_psd(rng, 0.5, 2.0);
  if (with_nugget) lmc.nugget = random_psd(rng, 0.0, 0.5);
  return lmc;
}

inline cokrige::MultivariateDataset random_dataset(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0, 1.0);
  cokrige::MultivariateDataset d;
  d.secondary_name = "secondary";
  d.colocated = true;
  for (const auto& l : random_locations(rng, n)) {
    const double a = z(rng);
    d.primary.push_back({l, a});
    d.secondary.push_back({l, 0.6 * a + 0.8 * z(rng)});
  }
  return d;
}

// Weight lookup by variable in production output order.
inline std::vector<double> weights_of(const cokrige::KrigingResult& r, cokrige::Variable v, std::size_t n) {
  std::vector<double> w(n, 0.0);
  for (const auto& x : r.weights)
    if (x.variable == v) w.at(x.index) = x.value;
  return w;
}

// Code of the cokrige::Error thrown by `body`, or nullopt if none.
template <typename F>
std::optional<cokrige::ErrorCode> error_of(F&& body) {
  try {
    body();
  } catch (const cokrige::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cokrige_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
