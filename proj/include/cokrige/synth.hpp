#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cokrige/types.hpp"
#include "cokrige/variogram.hpp"

namespace cokrige {

struct SynthSpec {
  std::size_t n_points = 0;
  BoundingBox box;
  LmcModel lmc;
  std::array<double, 2> means = {0.0, 0.0};
  std::uint64_t seed = 0;
  std::string secondary_name = "secondary";
};

/// Unconditional joint Gaussian draw at uniform random locations. The field
/// is built as a linear model of coregionalization: one correlated factor
/// field per structure eigen-component plus white-noise factors for the
/// nugget, which has the covariance C_ab(h) = total_sill_ab - gamma_ab(h).
MultivariateDataset generate_field(const SynthSpec& spec);

/// Same construction for any number of variables sharing one structure.
/// Returns one value vector per variable, aligned with `locations`.
std::vector<std::vector<double>> simulate_coregionalized(std::span<const Location> locations, Structure structure,
                                                         double range, const Eigen::MatrixXd& nugget,
                                                         const Eigen::MatrixXd& sill, std::uint64_t seed);

inline constexpr std::uint64_t kBundledSeed = 20140601;
inline constexpr std::size_t kBundledWells = 190;

/// Generating model of the demo dataset, in log10 units, variables ordered
/// (WPI, fluid volume, proppant volume).
struct BundledModel {
  Structure structure = Structure::Spherical;
  double range = 0.0;
  Eigen::Matrix3d nugget;
  Eigen::Matrix3d sill;
  std::array<double, 3> means{};
  BoundingBox box;
};

BundledModel bundled_model();

/// Demo completion records whose log10 WPI-hat, log10 fluid and log10
/// proppant follow the bundled model.
std::vector<WellRecord> bundled_wells(std::uint64_t seed = kBundledSeed);

/// Writes wells.csv into `directory` and returns its path.
std::filesystem::path make_bundled_dataset(const std::filesystem::path& directory,
                                           std::uint64_t seed = kBundledSeed);

}  // namespace cokrige
