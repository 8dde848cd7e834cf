#include "cokrige/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "cokrige/data_model.hpp"
#include "cokrige/error.hpp"

namespace cokrige::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 110.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr std::array<std::array<int, 3>, 5> kRamp = {{
    {0x44, 0x01, 0x54},
    {0x3b, 0x52, 0x8b},
    {0x21, 0x91, 0x8c},
    {0x5e, 0xc9, 0x62},
    {0xfd, 0xe7, 0x25},
}};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape_text(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string header(std::string_view title) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_text(title) << "</text>\n";
  return out.str();
}

/// Maps data coordinates into the plot frame.
struct Frame {
  double x0, x1, y0, y1;
  double px0 = kLeft, px1 = kWidth - kRight, py0 = kHeight - kBottom, py1 = kTop;

  double x(double v) const { return px0 + (v - x0) / (x1 - x0) * (px1 - px0); }
  double y(double v) const { return py0 + (v - y0) / (y1 - y0) * (py1 - py0); }
};

/// Same scale on both axes, centered in the plot area.
Frame equal_aspect(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
  if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
  Frame f{x0, x1, y0, y1};
  const double sx = (f.px1 - f.px0) / (x1 - x0), sy = (f.py0 - f.py1) / (y1 - y0);
  const double s = std::min(sx, sy);
  const double cx = 0.5 * (f.px0 + f.px1), cy = 0.5 * (f.py0 + f.py1);
  f.px0 = cx - 0.5 * s * (x1 - x0);
  f.px1 = cx + 0.5 * s * (x1 - x0);
  f.py0 = cy + 0.5 * s * (y1 - y0);
  f.py1 = cy - 0.5 * s * (y1 - y0);
  return f;
}

std::string axes(const Frame& f, std::string_view xlabel, std::string_view ylabel) {
  std::ostringstream out;
  out << "<g class=\"axes\" stroke=\"#333\" fill=\"none\">\n"
      << "<line x1=\"" << num(f.px0) << "\" y1=\"" << num(f.py0) << "\" x2=\"" << num(f.px1) << "\" y2=\""
      << num(f.py0) << "\"/>\n"
      << "<line x1=\"" << num(f.px0) << "\" y1=\"" << num(f.py0) << "\" x2=\"" << num(f.px0) << "\" y2=\""
      << num(f.py1) << "\"/>\n</g>\n";
  for (int k = 0; k <= 4; ++k) {
    const double vx = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double vy = f.y0 + (f.y1 - f.y0) * k / 4.0;
    out << "<text x=\"" << num(f.x(vx)) << "\" y=\"" << num(f.py0 + 16) << "\" text-anchor=\"middle\">" << label(vx)
        << "</text>\n";
    out << "<text x=\"" << num(f.px0 - 6) << "\" y=\"" << num(f.y(vy) + 4) << "\" text-anchor=\"end\">" << label(vy)
        << "</text>\n";
  }
  out << "<text x=\"" << num(0.5 * (f.px0 + f.px1)) << "\" y=\"" << num(kHeight - 12)
      << "\" text-anchor=\"middle\">" << escape_text(xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(0.5 * (f.py0 + f.py1)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(0.5 * (f.py0 + f.py1)) << ")\">" << escape_text(ylabel) << "</text>\n";
  return out.str();
}

}  // namespace

std::string ramp_color(double t) {
  if (!std::isfinite(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * (kRamp.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(pos), kRamp.size() - 2);
  const double f = pos - static_cast<double>(k);
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<int>(std::lround(kRamp[k][c] + f * (kRamp[k + 1][c] - kRamp[k][c])));
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string variogram_plot(const EmpiricalVariogram& empirical, const std::function<double(double)>& model,
                           std::string_view title) {
  if (empirical.bins.empty()) throw Error(ErrorCode::MalformedArtifact, "variogram has no bins");
  const double xmax = std::max(empirical.cutoff, empirical.bins.back().lag);
  double ymin = 0.0, ymax = 0.0;
  std::size_t max_count = 1;
  for (const auto& bin : empirical.bins) {
    ymin = std::min(ymin, bin.gamma);
    ymax = std::max(ymax, bin.gamma);
    max_count = std::max(max_count, bin.pair_count);
  }
  constexpr int kCurvePoints = 200;
  std::vector<std::pair<double, double>> curve;
  if (model) {
    for (int k = 1; k <= kCurvePoints; ++k) {
      const double h = xmax * k / kCurvePoints;
      const double g = model(h);
      curve.emplace_back(h, g);
      ymin = std::min(ymin, g);
      ymax = std::max(ymax, g);
    }
  }
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double pad = 0.08 * (ymax - ymin);
  const Frame f{0.0, xmax, ymin < 0.0 ? ymin - pad : 0.0, ymax + pad};

  std::ostringstream out;
  out << header(title) << axes(f, "lag distance (m)", "semivariance");
  if (!curve.empty()) {
    out << "<polyline class=\"model\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"" << num(f.x(0))
        << ',' << num(f.y(0));
    for (const auto& [h, g] : curve) out << ' ' << num(f.x(h)) << ',' << num(f.y(g));
    out << "\"/>\n";
  }
  for (const auto& bin : empirical.bins) {
    const double r = 2.0 + 6.0 * std::sqrt(static_cast<double>(bin.pair_count) / static_cast<double>(max_count));
    out << "<circle class=\"bin\" cx=\"" << num(f.x(bin.lag)) << "\" cy=\"" << num(f.y(bin.gamma)) << "\" r=\""
        << num(r) << "\" fill=\"#2c3e50\"><title>" << bin.pair_count << " pairs</title></circle>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string bubble_map(std::span<const SpatialSample> samples, std::string_view title) {
  if (samples.empty()) throw Error(ErrorCode::MalformedArtifact, "no samples to plot");
  const BoundingBox box = bounding_box(samples);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (const auto& s : samples) {
    vmin = std::min(vmin, s.value);
    vmax = std::max(vmax, s.value);
  }
  const Frame f = equal_aspect(box.min_x, box.max_x, box.min_y, box.max_y);

  std::ostringstream out;
  out << header(title) << axes(f, "easting (m)", "northing (m)");
  for (const auto& s : samples) {
    const double t = vmax > vmin ? (s.value - vmin) / (vmax - vmin) : 1.0;
    const double area = kMinArea + (kMaxArea - kMinArea) * t;
    out << "<circle class=\"sample\" cx=\"" << num(f.x(s.location.x)) << "\" cy=\"" << num(f.y(s.location.y))
        << "\" r=\"" << num(std::sqrt(area / M_PI)) << "\" fill=\"#2980b9\" fill-opacity=\"0.5\" stroke=\"#1b4f72\"><title>"
        << label(s.location.x) << ", " << label(s.location.y) << ": " << label(s.value) << "</title></circle>\n";
  }
  out << "<text class=\"legend\" x=\"" << num(kWidth - kRight + 10) << "\" y=\"" << num(kTop + 10) << "\">min "
      << label(vmin) << "</text>\n";
  out << "<text class=\"legend\" x=\"" << num(kWidth - kRight + 10) << "\" y=\"" << num(kTop + 28) << "\">max "
      << label(vmax) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

namespace {

double spacing(const std::set<double>& coords) {
  double best = std::numeric_limits<double>::infinity();
  if (coords.size() < 2) return 1.0;
  for (auto it = std::next(coords.begin()); it != coords.end(); ++it) best = std::min(best, *it - *std::prev(it));
  return std::isfinite(best) ? best : 1.0;
}

}  // namespace

std::string heatmap(std::span<const GridRow> rows, std::string_view title, bool show_variance) {
  std::set<double> xs, ys;
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (const auto& row : rows) {
    xs.insert(row.location.x);
    ys.insert(row.location.y);
    const double v = show_variance ? row.variance : row.prediction;
    if (!std::isfinite(v)) continue;
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (rows.empty() || !std::isfinite(vmin)) throw Error(ErrorCode::MalformedArtifact, "grid has no usable cells");
  const double dx = spacing(xs), dy = spacing(ys);
  const Frame f = equal_aspect(*xs.begin() - 0.5 * dx, *xs.rbegin() + 0.5 * dx, *ys.begin() - 0.5 * dy,
                               *ys.rbegin() + 0.5 * dy);

  std::ostringstream out;
  out << header(title) << axes(f, "easting (m)", "northing (m)");
  for (const auto& row : rows) {
    const double v = show_variance ? row.variance : row.prediction;
    if (!std::isfinite(v)) continue;
    const double t = vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5;
    const double x0 = f.x(row.location.x - 0.5 * dx), x1 = f.x(row.location.x + 0.5 * dx);
    const double y0 = f.y(row.location.y + 0.5 * dy), y1 = f.y(row.location.y - 0.5 * dy);
    out << "<rect class=\"cell\" x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0)
        << "\" height=\"" << num(y1 - y0) << "\" fill=\"" << ramp_color(t) << "\"/>\n";
  }

  const double lx = kWidth - kRight + 20, ly0 = kTop + 20, ly1 = kHeight - kBottom - 20;
  out << "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">";
  for (std::size_t k = 0; k < kRamp.size(); ++k) {
    const double t = static_cast<double>(k) / (kRamp.size() - 1);
    out << "<stop offset=\"" << num(t) << "\" stop-color=\"" << ramp_color(t) << "\"/>";
  }
  out << "</linearGradient></defs>\n";
  out << "<rect class=\"legend\" x=\"" << num(lx) << "\" y=\"" << num(ly0) << "\" width=\"18\" height=\""
      << num(ly1 - ly0) << "\" fill=\"url(#ramp)\"/>\n";
  out << "<text class=\"legend-max\" x=\"" << num(lx + 24) << "\" y=\"" << num(ly0 + 4) << "\">" << label(vmax)
      << "</text>\n";
  out << "<text class=\"legend-min\" x=\"" << num(lx + 24) << "\" y=\"" << num(ly1 + 4) << "\">" << label(vmin)
      << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

ArtifactKind parse_artifact_kind(std::string_view name) {
  if (name == "variogram") return ArtifactKind::Variogram;
  if (name == "bubble") return ArtifactKind::Bubble;
  if (name == "heatmap") return ArtifactKind::Heatmap;
  throw Error(ErrorCode::Usage, "unknown artifact kind '" + std::string(name) + "'");
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot open '" + path.string() + "'", path.string());
  return in;
}

}  // namespace

void render(const RenderRequest& request) {
  std::string document;
  auto in = open_input(request.data);
  switch (request.kind) {
    case ArtifactKind::Variogram: {
      const EmpiricalVariogram empirical = read_variogram_csv(in);
      std::function<double(double)> curve;
      if (!request.model.empty()) {
        auto model_in = open_input(request.model);
        const ModelFile file = read_model_text(model_in);
        if (file.variogram) {
          const VariogramModel m = *file.variogram;
          curve = [m](double h) { return model_value(m, h); };
        } else {
          const LmcModel lmc = *file.lmc;
          int a = 0, b = 0;
          if (request.component == "secondary") a = b = 1;
          else if (request.component == "cross") b = 1;
          else if (request.component != "primary")
            throw Error(ErrorCode::Usage, "component must be primary, secondary or cross");
          curve = [lmc, a, b](double h) { return lmc.value(a, b, h); };
        }
      }
      document = variogram_plot(empirical, curve, request.component + " variogram");
      break;
    }
    case ArtifactKind::Bubble:
      document = bubble_map(read_samples_csv(in, "primary"), "log10 WPI samples");
      break;
    case ArtifactKind::Heatmap: {
      const auto rows = read_grid_csv(in);
      document = heatmap(rows, request.variance ? "kriging variance" : "predicted log10 WPI", request.variance);
      break;
    }
  }
  std::ofstream out(request.output, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + request.output.string() + "'");
  out << document;
}

}  // namespace cokrige::svg
