#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cokrige/crossval.hpp"
#include "cokrige/data_model.hpp"
#include "cokrige/kriging.hpp"
#include "cokrige/variogram.hpp"
#include "cokrige/wpi.hpp"

namespace cokrige {

enum class SecondaryChoice { None, Fluid, Proppant };

std::string_view to_string(SecondaryChoice choice) noexcept;
SecondaryChoice parse_secondary(std::string_view name);

struct CvMode {
  std::size_t k = kLeaveOneOut;  // kLeaveOneOut or a fold count
};

CvMode parse_cv_mode(std::string_view text);

struct RunConfig {
  std::filesystem::path input;
  CsvSchema schema;
  SecondaryChoice secondary = SecondaryChoice::None;
  Structure structure = Structure::Spherical;
  std::optional<double> cutoff;
  std::optional<int> n_bins;
  std::size_t grid_nx = 100;
  std::size_t grid_ny = 100;
  std::optional<double> origin_x, origin_y, dx, dy;
  CvMode cv;
  std::uint64_t seed = 1;
  RefitPolicy refit = RefitPolicy::FixedModel;
  std::filesystem::path out_dir = "out";
  bool back_transform = false;
  double colocation_tolerance = 0.0;
  std::size_t top_n = 10;
  bool report_timing = false;
};

/// Applies "key = value" settings on top of `config`. Unknown keys and
/// malformed values throw Usage.
void apply_settings(RunConfig& config, std::span<const std::pair<std::string, std::string>> settings);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Keys understood by apply_settings, for help text.
std::vector<std::string_view> config_keys();

/// Validates paths and numeric fields; throws MissingInput or Usage.
void validate(const RunConfig& config);

/// Data prepared for one estimator: samples with their well ids, and the
/// co-located dataset when a secondary variable is used.
struct PreparedData {
  std::vector<std::string> well_ids;
  MultivariateDataset dataset;  // primary always filled; secondary only for CK
  std::vector<SpatialSample> full_secondary;
  std::vector<IneligibleWell> ineligible;
  std::vector<std::string> warnings;
  std::size_t discarded_primary = 0;
  std::size_t discarded_secondary = 0;
};

/// Ingests, computes log10 WPI-hat and, for CK, the co-located log10
/// secondary. When `restrict_to` is non-empty only those well ids are kept.
PreparedData prepare_data(const RunConfig& config, std::span<const std::string> restrict_to = {});

struct FittedEstimator {
  EstimatorConfig estimator;
  EmpiricalVariogram primary;
  std::optional<EmpiricalVariogram> secondary;
  std::optional<EmpiricalVariogram> cross;
  bool converged = true;
  bool projected = false;
};

FittedEstimator fit_estimator(const RunConfig& config, const MultivariateDataset& dataset);

std::string estimator_name(SecondaryChoice choice);

struct RunSummary {
  CvReport report;
  std::vector<std::filesystem::path> written;
};

/// Full pipeline; writes every artifact into config.out_dir.
RunSummary cmd_run(const RunConfig& config, std::ostream& log);

/// Cross-validates each configuration and writes comparison.csv into
/// `out_dir`. Configurations that share an input file are evaluated on the
/// wells usable by all of them.
std::vector<ComparisonRow> cmd_compare(std::span<const RunConfig> configs, const std::filesystem::path& out_dir,
                                       std::ostream& log);

}  // namespace cokrige
