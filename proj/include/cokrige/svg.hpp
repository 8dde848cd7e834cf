#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "cokrige/kriging.hpp"
#include "cokrige/types.hpp"
#include "cokrige/variogram.hpp"

namespace cokrige::svg {

/// Empirical points (radius grows with pair count) and, when given, the
/// fitted curve sampled on 200 lags up to the cutoff.
std::string variogram_plot(const EmpiricalVariogram& empirical, const std::function<double(double)>& model,
                           std::string_view title);

/// One circle per sample; marker area is affine in the value, from
/// kMinArea at the smallest value to kMaxArea at the largest.
std::string bubble_map(std::span<const SpatialSample> samples, std::string_view title);

inline constexpr double kMinArea = 12.0;
inline constexpr double kMaxArea = 400.0;

/// One rect (class "cell") per usable grid row plus a legend bar spanning
/// the value range. Colors come from a fixed five-stop ramp:
/// #440154 #3b528b #21918c #5ec962 #fde725 (low to high).
std::string heatmap(std::span<const GridRow> rows, std::string_view title, bool show_variance = false);

/// Hex color for a value at relative position t in [0, 1] on the ramp.
std::string ramp_color(double t);

enum class ArtifactKind { Variogram, Bubble, Heatmap };

ArtifactKind parse_artifact_kind(std::string_view name);

struct RenderRequest {
  ArtifactKind kind = ArtifactKind::Variogram;
  std::filesystem::path data;        // variogram CSV, samples CSV or grid CSV
  std::filesystem::path model;       // optional model text for variogram plots
  std::string component = "primary"; // primary | secondary | cross
  std::filesystem::path output;
  bool variance = false;             // heatmap of the variance column
};

/// Reads the data file(s), renders, and writes the SVG. Throws
/// MalformedArtifact on unreadable or empty inputs.
void render(const RenderRequest& request);

}  // namespace cokrige::svg
