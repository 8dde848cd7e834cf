#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "cokrige/csv.hpp"
#include "cokrige/error.hpp"
#include "cokrige/pipeline.hpp"

namespace cokrige {

std::string_view to_string(SecondaryChoice choice) noexcept {
  switch (choice) {
    case SecondaryChoice::None: return "none";
    case SecondaryChoice::Fluid: return "fluid";
    case SecondaryChoice::Proppant: return "proppant";
  }
  return "none";
}

SecondaryChoice parse_secondary(std::string_view name) {
  if (name == "none" || name == "ok") return SecondaryChoice::None;
  if (name == "fluid") return SecondaryChoice::Fluid;
  if (name == "proppant") return SecondaryChoice::Proppant;
  throw Error(ErrorCode::Usage, "secondary must be fluid, proppant or none, got '" + std::string(name) + "'");
}

namespace {

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
  Int value{};
  const auto t = csv::trim(text);
  const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (result.ec != std::errc() || result.ptr != t.data() + t.size())
    throw Error(ErrorCode::Usage, std::string(key) + ": expected an integer, got '" + t + "'", std::string(key));
  return value;
}

double parse_number(std::string_view key, std::string_view text) {
  const auto value = csv::parse_double(text);
  if (!value || !std::isfinite(*value))
    throw Error(ErrorCode::Usage, std::string(key) + ": expected a number, got '" + std::string(text) + "'",
                std::string(key));
  return *value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text.empty() || text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(ErrorCode::Usage, std::string(key) + ": expected true or false", std::string(key));
}

}  // namespace

CvMode parse_cv_mode(std::string_view text) {
  if (text == "loo") return {kLeaveOneOut};
  if (text.rfind("k=", 0) == 0) {
    const auto k = parse_integer<std::size_t>("cv", text.substr(2));
    if (k < 2) throw Error(ErrorCode::InvalidK, "fold count must be at least 2");
    return {k};
  }
  throw Error(ErrorCode::Usage, "cv must be 'loo' or 'k=<int>', got '" + std::string(text) + "'", "cv");
}

std::vector<std::string_view> config_keys() {
  return {"input", "secondary", "structure", "cutoff", "n_bins", "nx", "ny", "grid", "origin_x", "origin_y", "dx",
          "dy", "cv", "seed", "refit", "out", "back_transform", "colocation_tolerance", "top_n", "report_timing",
          "column.well_id", "column.x", "column.y", "column.avg_rate_90d", "column.frac_gradient", "column.tvd",
          "column.fluid_volume", "column.proppant_volume"};
}

void apply_settings(RunConfig& c, std::span<const std::pair<std::string, std::string>> settings) {
  for (const auto& [key, value] : settings) {
    if (key == "input") c.input = value;
    else if (key == "secondary") c.secondary = parse_secondary(value);
    else if (key == "structure") c.structure = parse_structure(value);
    else if (key == "cutoff") c.cutoff = parse_number(key, value);
    else if (key == "n_bins") c.n_bins = parse_integer<int>(key, value);
    else if (key == "nx") c.grid_nx = parse_integer<std::size_t>(key, value);
    else if (key == "ny") c.grid_ny = parse_integer<std::size_t>(key, value);
    else if (key == "grid") {
      const auto comma = value.find(',');
      if (comma == std::string::npos) throw Error(ErrorCode::Usage, "grid must be 'nx,ny'", key);
      c.grid_nx = parse_integer<std::size_t>(key, std::string_view(value).substr(0, comma));
      c.grid_ny = parse_integer<std::size_t>(key, std::string_view(value).substr(comma + 1));
    }
    else if (key == "origin_x") c.origin_x = parse_number(key, value);
    else if (key == "origin_y") c.origin_y = parse_number(key, value);
    else if (key == "dx") c.dx = parse_number(key, value);
    else if (key == "dy") c.dy = parse_number(key, value);
    else if (key == "cv") c.cv = parse_cv_mode(value);
    else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "refit") {
      if (value == "fixed") c.refit = RefitPolicy::FixedModel;
      else if (value == "per_fold") c.refit = RefitPolicy::RefitPerFold;
      else throw Error(ErrorCode::Usage, "refit must be 'fixed' or 'per_fold'", key);
    }
    else if (key == "out") c.out_dir = value;
    else if (key == "back_transform") c.back_transform = parse_bool(key, value);
    else if (key == "colocation_tolerance") c.colocation_tolerance = parse_number(key, value);
    else if (key == "top_n") c.top_n = parse_integer<std::size_t>(key, value);
    else if (key == "report_timing") c.report_timing = parse_bool(key, value);
    else if (key == "column.well_id") c.schema.well_id = value;
    else if (key == "column.x") c.schema.x = value;
    else if (key == "column.y") c.schema.y = value;
    else if (key == "column.avg_rate_90d") c.schema.avg_rate_90d = value;
    else if (key == "column.frac_gradient") c.schema.frac_gradient = value;
    else if (key == "column.tvd") c.schema.tvd = value;
    else if (key == "column.fluid_volume") c.schema.fluid_volume = value;
    else if (key == "column.proppant_volume") c.schema.proppant_volume = value;
    else throw Error(ErrorCode::Usage, "unknown configuration key '" + key + "'", key);
  }
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot open config '" + path.string() + "'", path.string());
  const auto settings = csv::read_key_values(in);
  apply_settings(base, settings);
  // Relative paths in a config file are relative to the file itself.
  const auto dir = path.parent_path();
  for (const auto& [key, value] : settings) {
    if (key == "input" && base.input.is_relative()) base.input = dir / base.input;
    if (key == "out" && base.out_dir.is_relative()) base.out_dir = dir / base.out_dir;
  }
  return base;
}

void validate(const RunConfig& c) {
  if (c.input.empty()) throw Error(ErrorCode::Usage, "no input file given");
  if (!std::filesystem::is_regular_file(c.input))
    throw Error(ErrorCode::MissingInput, "input '" + c.input.string() + "' does not exist", c.input.string());
  if (c.cutoff && !(*c.cutoff > 0.0)) throw Error(ErrorCode::Usage, "cutoff must be positive", "cutoff");
  if (c.n_bins && *c.n_bins < 1) throw Error(ErrorCode::Usage, "n_bins must be positive", "n_bins");
  if (c.grid_nx == 0 || c.grid_ny == 0) throw Error(ErrorCode::Usage, "grid dimensions must be positive", "grid");
  if ((c.dx && !(*c.dx > 0.0)) || (c.dy && !(*c.dy > 0.0)))
    throw Error(ErrorCode::Usage, "grid spacing must be positive", "dx");
  if (!(c.colocation_tolerance >= 0.0))
    throw Error(ErrorCode::Usage, "colocation_tolerance must be >= 0", "colocation_tolerance");
}

}  // namespace cokrige
