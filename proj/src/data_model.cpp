#include "cokrige/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cokrige/csv.hpp"
#include "cokrige/error.hpp"

namespace cokrige {

void require_colocated(const MultivariateDataset& dataset) {
  if (!dataset.colocated) throw Error(ErrorCode::NotColocated, "dataset is not co-located");
  if (dataset.primary.size() != dataset.secondary.size())
    throw Error(ErrorCode::NotColocated, "primary and secondary sample counts differ");
  for (std::size_t i = 0; i < dataset.primary.size(); ++i)
    if (!(dataset.primary[i].location == dataset.secondary[i].location))
      throw Error(ErrorCode::NotColocated, "pair " + std::to_string(i) + " has different locations");
}

BoundingBox bounding_box(std::span<const SpatialSample> samples) {
  BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& s : samples) {
    box.min_x = std::min(box.min_x, s.location.x);
    box.min_y = std::min(box.min_y, s.location.y);
    box.max_x = std::max(box.max_x, s.location.x);
    box.max_y = std::max(box.max_y, s.location.y);
  }
  if (samples.empty()) box = {};
  return box;
}

namespace {

struct ColumnIndex {
  std::size_t well_id, x, y;
  std::optional<std::size_t> avg_rate, frac_gradient, tvd, fluid, proppant;
};

std::size_t required_column(const csv::Table& table, const std::string& name) {
  auto idx = table.column(name);
  if (!idx) throw Error(ErrorCode::MissingColumn, "missing column '" + name + "'", name);
  return *idx;
}

std::optional<double> optional_number(const std::vector<std::string>& row, std::optional<std::size_t> col,
                                      const std::string& name, long row_number, const std::string& well_id,
                                      std::vector<std::string>& warnings) {
  if (!col) return std::nullopt;
  const std::string text = *col < row.size() ? csv::trim(row[*col]) : std::string();
  if (text.empty()) {
    warnings.push_back("row " + std::to_string(row_number) + " (" + well_id + "): empty " + name);
    return std::nullopt;
  }
  auto value = csv::parse_double(text);
  if (!value || !std::isfinite(*value))
    throw Error(ErrorCode::ParseFailure,
                "row " + std::to_string(row_number) + ", column '" + name + "': cannot parse '" + text + "'", name,
                row_number);
  return value;
}

double required_number(const std::vector<std::string>& row, std::size_t col, const std::string& name,
                       long row_number) {
  const std::string text = col < row.size() ? csv::trim(row[col]) : std::string();
  auto value = csv::parse_double(text);
  if (!value || !std::isfinite(*value))
    throw Error(ErrorCode::ParseFailure,
                "row " + std::to_string(row_number) + ", column '" + name + "': cannot parse '" + text + "'", name,
                row_number);
  return *value;
}

}  // namespace

IngestResult parse_wells_csv(std::istream& in, const CsvSchema& schema) {
  const csv::Table table = csv::read(in);
  if (table.header.empty()) throw Error(ErrorCode::MissingColumn, "no header row", schema.well_id);

  ColumnIndex cols{required_column(table, schema.well_id), required_column(table, schema.x),
                   required_column(table, schema.y), table.column(schema.avg_rate_90d),
                   table.column(schema.frac_gradient), table.column(schema.tvd),
                   table.column(schema.fluid_volume), table.column(schema.proppant_volume)};

  IngestResult result;
  std::set<std::string> ids;
  std::map<std::pair<double, double>, std::string> locations;
  long row_number = 0;
  for (const auto& row : table.rows) {
    ++row_number;
    WellRecord record;
    record.well_id = cols.well_id < row.size() ? csv::trim(row[cols.well_id]) : std::string();
    if (record.well_id.empty())
      throw Error(ErrorCode::ParseFailure, "row " + std::to_string(row_number) + ": empty well id", schema.well_id,
                  row_number);
    record.location.x = required_number(row, cols.x, schema.x, row_number);
    record.location.y = required_number(row, cols.y, schema.y, row_number);
    auto& w = result.warnings;
    record.avg_rate_90d = optional_number(row, cols.avg_rate, schema.avg_rate_90d, row_number, record.well_id, w);
    record.frac_gradient =
        optional_number(row, cols.frac_gradient, schema.frac_gradient, row_number, record.well_id, w);
    record.tvd = optional_number(row, cols.tvd, schema.tvd, row_number, record.well_id, w);
    record.fluid_volume = optional_number(row, cols.fluid, schema.fluid_volume, row_number, record.well_id, w);
    record.proppant_volume =
        optional_number(row, cols.proppant, schema.proppant_volume, row_number, record.well_id, w);

    if (!ids.insert(record.well_id).second)
      throw Error(ErrorCode::DuplicateWellId, "duplicate well id '" + record.well_id + "'", record.well_id,
                  row_number);
    const auto key = std::make_pair(record.location.x, record.location.y);
    if (auto [it, inserted] = locations.emplace(key, record.well_id); !inserted)
      throw Error(ErrorCode::DuplicateLocation,
                  "wells '" + it->second + "' and '" + record.well_id + "' share a location", record.well_id,
                  row_number);
    result.records.push_back(std::move(record));
  }
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot open '" + path.string() + "'", path.string());
  return parse_wells_csv(in, schema);
}

void write_wells_csv(std::ostream& out, std::span<const WellRecord> records, const CsvSchema& schema) {
  out << csv::escape(schema.well_id) << ',' << csv::escape(schema.x) << ',' << csv::escape(schema.y) << ','
      << csv::escape(schema.avg_rate_90d) << ',' << csv::escape(schema.frac_gradient) << ','
      << csv::escape(schema.tvd) << ',' << csv::escape(schema.fluid_volume) << ','
      << csv::escape(schema.proppant_volume) << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : records) {
    out << csv::escape(r.well_id) << ',' << csv::format_double(r.location.x) << ','
        << csv::format_double(r.location.y) << ',' << opt(r.avg_rate_90d) << ',' << opt(r.frac_gradient) << ','
        << opt(r.tvd) << ',' << opt(r.fluid_volume) << ',' << opt(r.proppant_volume) << '\n';
  }
}

std::vector<SpatialSample> log10_transform(std::span<const SpatialSample> samples) {
  std::vector<SpatialSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!(s.value > 0.0) || !std::isfinite(s.value)) {
      std::ostringstream msg;
      msg << "value " << s.value << " at (" << s.location.x << ", " << s.location.y << ") is not positive";
      throw Error(ErrorCode::NonPositiveValue, msg.str());
    }
    out.push_back({s.location, std::log10(s.value)});
  }
  return out;
}

ColocateResult colocate(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                        double tolerance, std::string secondary_name) {
  if (!(tolerance >= 0.0)) throw Error(ErrorCode::Usage, "co-location tolerance must be >= 0");

  ColocateResult result;
  result.dataset.secondary_name = std::move(secondary_name);
  result.dataset.colocated = true;
  std::vector<int> claimed(secondary.size(), -1);
  for (std::size_t i = 0; i < primary.size(); ++i) {
    std::optional<std::size_t> match;
    for (std::size_t j = 0; j < secondary.size(); ++j) {
      if (distance(primary[i].location, secondary[j].location) > tolerance) continue;
      if (match)
        throw Error(ErrorCode::AmbiguousMatch, "several secondary samples within tolerance of primary sample " +
                                                   std::to_string(i));
      match = j;
    }
    if (!match) {
      ++result.discarded_primary;
      continue;
    }
    if (claimed[*match] >= 0)
      throw Error(ErrorCode::AmbiguousMatch,
                  "secondary sample " + std::to_string(*match) + " matches several primary samples");
    claimed[*match] = static_cast<int>(i);
    result.dataset.primary.push_back(primary[i]);
    result.dataset.secondary.push_back({primary[i].location, secondary[*match].value});
  }
  result.discarded_secondary = secondary.size() - result.dataset.secondary.size();
  return result;
}

double pearson_correlation(const MultivariateDataset& dataset) {
  require_colocated(dataset);
  const std::size_t n = dataset.size();
  if (n < 2) throw Error(ErrorCode::DegenerateVariance, "need at least two pairs");
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += dataset.primary[i].value;
    mv += dataset.secondary[i].value;
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double suu = 0.0, svv = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double du = dataset.primary[i].value - mu;
    const double dv = dataset.secondary[i].value - mv;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
  }
  if (suu <= 0.0 || svv <= 0.0) throw Error(ErrorCode::DegenerateVariance, "a variable is constant");
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

}  // namespace cokrige

namespace cokrige {

void write_samples_csv(std::ostream& out, std::span<const std::string> well_ids, const MultivariateDataset& dataset) {
  const bool with_secondary = !dataset.secondary.empty();
  out << "well_id,x,y,primary" << (with_secondary ? ",secondary" : "") << '\n';
  for (std::size_t i = 0; i < dataset.primary.size(); ++i) {
    const auto& p = dataset.primary[i];
    out << csv::escape(i < well_ids.size() ? well_ids[i] : std::to_string(i)) << ','
        << csv::format_double(p.location.x) << ',' << csv::format_double(p.location.y) << ','
        << csv::format_double(p.value);
    if (with_secondary) out << ',' << csv::format_double(dataset.secondary[i].value);
    out << '\n';
  }
}

std::vector<SpatialSample> read_samples_csv(std::istream& in, std::string_view column) {
  const csv::Table table = csv::read(in);
  const auto x = table.column("x"), y = table.column("y");
  auto value = table.column(column);
  if (!value) value = table.column("value");
  if (!x || !y || !value)
    throw Error(ErrorCode::MalformedArtifact, "samples CSV lacks x, y or '" + std::string(column) + "'");
  std::vector<SpatialSample> out;
  for (const auto& row : table.rows) {
    if (row.size() <= std::max({*x, *y, *value})) throw Error(ErrorCode::MalformedArtifact, "short samples row");
    const auto fx = csv::parse_double(row[*x]), fy = csv::parse_double(row[*y]), fv = csv::parse_double(row[*value]);
    if (!fx || !fy || !fv) throw Error(ErrorCode::MalformedArtifact, "unparseable samples row");
    out.push_back({{*fx, *fy}, *fv});
  }
  if (out.empty()) throw Error(ErrorCode::MalformedArtifact, "samples CSV has no rows");
  return out;
}

}  // namespace cokrige
