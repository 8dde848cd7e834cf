#pragma once

#include <span>
#include <string>
#include <vector>

#include "cokrige/types.hpp"

namespace cokrige {

enum class WpiMethod { Exact, Estimated };

/// Well performance index. Units are a composite of MCFE and psi and only
/// relative magnitudes are meaningful.
struct WpiValue {
  std::string well_id;
  Location location;
  double wpi = 0.0;
  WpiMethod method = WpiMethod::Estimated;
};

inline constexpr int kProductionDays = 90;

/// Sum of daily rate times daily pressure over at most 90 days.
double compute_wpi_exact(std::span<const DailyProduction> daily_series);
WpiValue compute_wpi_exact(const WellRecord& record);

/// avg_rate_90d * 90 * frac_gradient * tvd, i.e. the exact index with rate
/// and pressure held constant (pressure taken as gradient times depth).
WpiValue compute_wpi_hat(const WellRecord& record);

struct IneligibleWell {
  std::string well_id;
  std::string reason;
};

struct PrimarySamples {
  std::vector<SpatialSample> samples;  // log10 WPI-hat
  std::vector<std::string> well_ids;   // aligned with samples
  std::vector<IneligibleWell> ineligible;
};

PrimarySamples build_primary_samples(std::span<const WellRecord> records);

}  // namespace cokrige
