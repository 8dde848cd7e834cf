#include "cokrige/wpi.hpp"

#include <cmath>

#include "cokrige/error.hpp"

namespace cokrige {

double compute_wpi_exact(std::span<const DailyProduction> daily_series) {
  if (daily_series.empty()) throw Error(ErrorCode::EmptySeries, "daily series is empty");
  if (daily_series.size() > static_cast<std::size_t>(kProductionDays))
    throw Error(ErrorCode::Usage, "daily series longer than 90 days");
  double sum = 0.0;
  for (const auto& day : daily_series) {
    if (day.rate < 0.0 || day.pressure < 0.0)
      throw Error(ErrorCode::NonPositiveValue, "negative daily rate or pressure");
    sum += day.rate * day.pressure;
  }
  return sum;
}

WpiValue compute_wpi_exact(const WellRecord& record) {
  return {record.well_id, record.location, compute_wpi_exact(record.daily_series), WpiMethod::Exact};
}

namespace {

double positive_field(const std::optional<double>& field, const char* name, const std::string& well_id) {
  if (!field) throw Error(ErrorCode::MissingField, "well '" + well_id + "' has no " + name, name);
  if (!(*field > 0.0))
    throw Error(ErrorCode::NonPositiveValue, "well '" + well_id + "' has non-positive " + name, name);
  return *field;
}

}  // namespace

WpiValue compute_wpi_hat(const WellRecord& record) {
  const double rate = positive_field(record.avg_rate_90d, "avg_rate_90d", record.well_id);
  const double gradient = positive_field(record.frac_gradient, "frac_gradient", record.well_id);
  const double depth = positive_field(record.tvd, "tvd", record.well_id);
  return {record.well_id, record.location, rate * kProductionDays * gradient * depth, WpiMethod::Estimated};
}

PrimarySamples build_primary_samples(std::span<const WellRecord> records) {
  PrimarySamples out;
  for (const auto& record : records) {
    try {
      const WpiValue v = compute_wpi_hat(record);
      out.samples.push_back({record.location, std::log10(v.wpi)});
      out.well_ids.push_back(record.well_id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingField && e.code() != ErrorCode::NonPositiveValue) throw;
      out.ineligible.push_back({record.well_id, e.what()});
    }
  }
  if (out.samples.empty()) throw Error(ErrorCode::NoEligibleWells, "no well has positive rate, gradient and depth");
  return out;
}

}  // namespace cokrige
