#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cokrige/types.hpp"

namespace cokrige {

/// Column names for the completion CSV. Defaults match the bundled dataset.
struct CsvSchema {
  std::string well_id = "well_id";
  std::string x = "x";
  std::string y = "y";
  std::string avg_rate_90d = "avg_rate_90d";
  std::string frac_gradient = "frac_gradient";
  std::string tvd = "tvd";
  std::string fluid_volume = "fluid_volume";
  std::string proppant_volume = "proppant_volume";
};

struct IngestResult {
  std::vector<WellRecord> records;
  std::vector<std::string> warnings;
};

/// Reads the completion CSV. Identifier and coordinates are mandatory on
/// every row; the remaining columns may be blank (a warning is recorded).
/// Duplicate well ids and duplicate locations are rejected.
IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
IngestResult parse_wells_csv(std::istream& in, const CsvSchema& schema = {});

void write_wells_csv(std::ostream& out, std::span<const WellRecord> records, const CsvSchema& schema = {});

std::vector<SpatialSample> log10_transform(std::span<const SpatialSample> samples);

struct ColocateResult {
  MultivariateDataset dataset;
  std::size_t discarded_primary = 0;
  std::size_t discarded_secondary = 0;
};

/// Pairs every primary sample with the unique secondary sample within
/// `tolerance` meters; both members of a pair take the primary location.
ColocateResult colocate(std::span<const SpatialSample> primary, std::span<const SpatialSample> secondary,
                        double tolerance = 0.0, std::string secondary_name = {});

double pearson_correlation(const MultivariateDataset& dataset);

/// well_id,x,y,primary[,secondary] -- the secondary column is written only
/// when the dataset carries one. `well_ids` is aligned with the primary list.
void write_samples_csv(std::ostream& out, std::span<const std::string> well_ids, const MultivariateDataset& dataset);

/// Samples from one value column of a samples CSV.
std::vector<SpatialSample> read_samples_csv(std::istream& in, std::string_view column = "primary");

}  // namespace cokrige
