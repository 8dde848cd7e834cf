#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cokrige {

/// Planar position, easting/northing in meters.
struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

inline double distance(const Location& a, const Location& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct SpatialSample {
  Location location;
  double value = 0.0;
};

struct DailyProduction {
  double rate = 0.0;      // MCFE/day
  double pressure = 0.0;  // psi
};

/// One row of the completion database. Everything past the location is
/// optional at ingestion; eligibility for the index is decided later.
struct WellRecord {
  std::string well_id;
  Location location;
  std::optional<double> avg_rate_90d;     // MCFE/day
  std::optional<double> frac_gradient;    // psi/ft
  std::optional<double> tvd;              // ft
  std::optional<double> fluid_volume;     // gal
  std::optional<double> proppant_volume;  // lb
  std::vector<DailyProduction> daily_series;
};

/// Primary (log10 WPI) and one secondary variable. When `colocated` is set
/// the two lists have equal length and pairwise identical locations.
struct MultivariateDataset {
  std::vector<SpatialSample> primary;
  std::vector<SpatialSample> secondary;
  std::string secondary_name;
  bool colocated = false;

  std::size_t size() const { return primary.size(); }
};

/// Throws NotColocated unless the dataset satisfies the co-located invariant.
void require_colocated(const MultivariateDataset& dataset);

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double diagonal() const { return std::hypot(width(), height()); }
};

BoundingBox bounding_box(std::span<const SpatialSample> samples);

enum class Execution { Serial, Parallel };

}  // namespace cokrige
