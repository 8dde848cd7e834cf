#include "cokrige/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "cokrige/csv.hpp"
#include "cokrige/error.hpp"
#include "cokrige/svg.hpp"
#include "cokrige/wpi.hpp"

namespace cokrige {

std::string estimator_name(SecondaryChoice choice) {
  switch (choice) {
    case SecondaryChoice::None: return "OK";
    case SecondaryChoice::Fluid: return "CK with fluid";
    case SecondaryChoice::Proppant: return "CK with proppant";
  }
  return "OK";
}

PreparedData prepare_data(const RunConfig& config, std::span<const std::string> restrict_to) {
  IngestResult ingest = ingest_csv(config.input, config.schema);
  PreparedData out;
  out.warnings = std::move(ingest.warnings);

  std::vector<WellRecord> records = std::move(ingest.records);
  if (!restrict_to.empty()) {
    const std::set<std::string> keep(restrict_to.begin(), restrict_to.end());
    std::erase_if(records, [&](const WellRecord& r) { return !keep.contains(r.well_id); });
  }

  PrimarySamples primary = build_primary_samples(records);
  out.ineligible = std::move(primary.ineligible);

  if (config.secondary == SecondaryChoice::None) {
    out.dataset.primary = std::move(primary.samples);
    out.well_ids = std::move(primary.well_ids);
    return out;
  }

  const bool fluid = config.secondary == SecondaryChoice::Fluid;
  std::vector<SpatialSample> raw;
  for (const auto& r : records) {
    const auto& volume = fluid ? r.fluid_volume : r.proppant_volume;
    if (!volume) continue;
    if (!(*volume > 0.0)) {
      out.warnings.push_back("well '" + r.well_id + "': non-positive " + std::string(to_string(config.secondary)) +
                             " volume excluded");
      continue;
    }
    raw.push_back({r.location, *volume});
  }
  out.full_secondary = log10_transform(raw);

  ColocateResult colocated =
      colocate(primary.samples, out.full_secondary, config.colocation_tolerance, std::string(to_string(config.secondary)));
  out.discarded_primary = colocated.discarded_primary;
  out.discarded_secondary = colocated.discarded_secondary;
  out.dataset = std::move(colocated.dataset);

  std::map<std::pair<double, double>, std::string> id_at;
  for (std::size_t i = 0; i < primary.samples.size(); ++i)
    id_at[{primary.samples[i].location.x, primary.samples[i].location.y}] = primary.well_ids[i];
  for (const auto& s : out.dataset.primary) out.well_ids.push_back(id_at.at({s.location.x, s.location.y}));
  return out;
}

FittedEstimator fit_estimator(const RunConfig& config, const MultivariateDataset& dataset) {
  FittedEstimator fitted;
  EstimatorConfig& e = fitted.estimator;
  e.name = estimator_name(config.secondary);
  e.structure = config.structure;
  e.cutoff = config.cutoff.value_or(default_cutoff(dataset.primary));
  e.n_bins = config.n_bins.value_or(kDefaultBins);

  fitted.primary = empirical_variogram(dataset.primary, e.cutoff, e.n_bins);
  if (config.secondary == SecondaryChoice::None) {
    e.kind = EstimatorKind::Ok;
    const ModelFit fit = fit_model(fitted.primary, e.structure);
    e.model = fit.model;
    e.fit_objective = fit.objective;
    fitted.converged = fit.converged;
    return fitted;
  }

  e.kind = EstimatorKind::Ck;
  fitted.secondary = empirical_variogram(dataset.secondary, e.cutoff, e.n_bins);
  fitted.cross = empirical_cross_variogram(dataset, e.cutoff, e.n_bins);
  const LmcFit fit = fit_lmc(fitted.primary, *fitted.secondary, *fitted.cross, e.structure);
  e.lmc = fit.model;
  e.model = fit.model.direct(0);
  e.fit_objective = fit.objective;
  fitted.converged = fit.converged;
  fitted.projected = fit.projected;
  return fitted;
}

namespace {

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + dir_.string() + "'", dir_.string());
  }

  template <typename Writer>
  void write(const std::string& name, Writer&& writer) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'", path.string());
    writer(out);
    if (!out) throw Error(ErrorCode::IoFailure, "write to '" + path.string() + "' failed", path.string());
    written_.push_back(path);
  }

  std::vector<std::filesystem::path> written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

GridSpec grid_for(const RunConfig& config, std::span<const SpatialSample> samples) {
  GridSpec spec = GridSpec::covering(samples, config.grid_nx, config.grid_ny);
  if (config.origin_x) spec.origin.x = *config.origin_x;
  if (config.origin_y) spec.origin.y = *config.origin_y;
  if (config.dx) spec.dx = *config.dx;
  if (config.dy) spec.dy = *config.dy;
  return spec;
}

KrigingInputs inputs_for(const FittedEstimator& fitted, const MultivariateDataset& dataset) {
  if (fitted.estimator.kind == EstimatorKind::Ok) return OkInputs{dataset.primary, fitted.estimator.model};
  return CkInputs{dataset, fitted.estimator.lmc};
}

}  // namespace

RunSummary cmd_run(const RunConfig& config, std::ostream& log) {
  validate(config);
  const PreparedData data = prepare_data(config, {});
  for (const auto& w : data.warnings) log << "warning: " << w << '\n';
  const FittedEstimator fitted = fit_estimator(config, data.dataset);
  const EstimatorConfig& estimator = fitted.estimator;
  const bool cokriging = estimator.kind == EstimatorKind::Ck;

  const GridSpec spec = grid_for(config, data.dataset.primary);
  const PredictionGrid grid = predict_grid(inputs_for(fitted, data.dataset), spec);

  const FoldPlan plan = make_folds(data.dataset.size(), config.cv.k, config.seed);
  const CvReport report = cross_validate(estimator, data.dataset, plan, config.refit);
  const std::vector<CvReport> reports{report};
  const auto rows = compare_estimators(reports);

  OutputDir out(config.out_dir);
  out.write("samples.csv", [&](std::ostream& o) { write_samples_csv(o, data.well_ids, data.dataset); });
  out.write("ineligible_wells.csv", [&](std::ostream& o) {
    o << "well_id,reason\n";
    for (const auto& w : data.ineligible) o << csv::escape(w.well_id) << ',' << csv::escape(w.reason) << '\n';
  });
  out.write("variogram_primary.csv", [&](std::ostream& o) { write_variogram_csv(o, fitted.primary); });
  if (cokriging) {
    out.write("variogram_secondary.csv", [&](std::ostream& o) { write_variogram_csv(o, *fitted.secondary); });
    out.write("variogram_cross.csv", [&](std::ostream& o) { write_variogram_csv(o, *fitted.cross); });
  }

  out.write("model.txt", [&](std::ostream& o) {
    if (cokriging)
      write_model_text(o, estimator.lmc);
    else
      write_model_text(o, estimator.model);
    o << "estimator = " << estimator.name << '\n'
      << "cutoff = " << csv::format_double(estimator.cutoff) << '\n'
      << "n_bins = " << estimator.n_bins << '\n'
      << "fit_objective = " << csv::format_double(estimator.fit_objective) << '\n'
      << "converged = " << (fitted.converged ? "true" : "false") << '\n'
      << "samples = " << data.dataset.size() << '\n'
      << "ineligible_wells = " << data.ineligible.size() << '\n';
    if (cokriging) {
      o << "psd_projection = " << (fitted.projected ? "true" : "false") << '\n'
        << "discarded_primary = " << data.discarded_primary << '\n'
        << "discarded_secondary = " << data.discarded_secondary << '\n';
      try {
        o << "pearson = " << csv::format_double(pearson_correlation(data.dataset)) << '\n';
      } catch (const Error&) {
        o << "pearson = nan\n";
      }
      try {
        const auto ranges = range_diagnostic(data.full_secondary, data.dataset.secondary, estimator.cutoff,
                                             estimator.n_bins, estimator.structure);
        o << "range_full_secondary = " << csv::format_double(ranges.range_full) << '\n'
          << "range_colocated_secondary = " << csv::format_double(ranges.range_colocated) << '\n';
      } catch (const Error&) {
        o << "range_full_secondary = nan\nrange_colocated_secondary = nan\n";
      }
    }
  });

  out.write("grid_prediction.csv", [&](std::ostream& o) { write_grid_csv(o, grid, config.back_transform); });
  out.write("grid_variance.csv", [&](std::ostream& o) { write_variance_csv(o, grid); });
  out.write("top_cells.csv", [&](std::ostream& o) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
      if (std::isfinite(grid.cells[i].prediction)) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return grid.cells[a].prediction > grid.cells[b].prediction;
    });
    o << "rank,x,y,prediction,variance\n";
    for (std::size_t r = 0; r < std::min(config.top_n, order.size()); ++r) {
      const auto& cell = grid.cells[order[r]];
      const double p = config.back_transform ? std::pow(10.0, cell.prediction) : cell.prediction;
      o << r + 1 << ',' << csv::format_double(cell.location.x) << ',' << csv::format_double(cell.location.y) << ','
        << csv::format_double(p) << ',' << csv::format_double(cell.variance) << '\n';
    }
  });
  out.write("cv_report.csv", [&](std::ostream& o) { write_cv_report_csv(o, report); });
  out.write("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, rows, config.report_timing); });
  out.write("timing.txt", [&](std::ostream& o) {
    o << "cv_wall_clock_seconds = " << csv::format_double(report.wall_clock) << '\n';
  });

  // Plots.
  auto curve_for = [&](int a, int b) -> std::function<double(double)> {
    if (!cokriging) {
      const VariogramModel m = estimator.model;
      return [m](double h) { return model_value(m, h); };
    }
    const LmcModel lmc = estimator.lmc;
    return [lmc, a, b](double h) { return lmc.value(a, b, h); };
  };
  out.write("variogram_primary.svg", [&](std::ostream& o) {
    o << svg::variogram_plot(fitted.primary, curve_for(0, 0), "log10 WPI variogram");
  });
  if (cokriging) {
    const std::string name = data.dataset.secondary_name;
    out.write("variogram_secondary.svg", [&](std::ostream& o) {
      o << svg::variogram_plot(*fitted.secondary, curve_for(1, 1), "log10 " + name + " variogram");
    });
    out.write("variogram_cross.svg", [&](std::ostream& o) {
      o << svg::variogram_plot(*fitted.cross, curve_for(0, 1), "log10 WPI x log10 " + name + " cross variogram");
    });
  }
  out.write("samples_bubble.svg",
            [&](std::ostream& o) { o << svg::bubble_map(data.dataset.primary, "log10 WPI samples"); });
  std::vector<GridRow> grid_rows;
  for (const auto& cell : grid.cells) grid_rows.push_back({cell.location, cell.prediction, cell.variance, cell.flag});
  try {
    out.write("grid_prediction.svg", [&](std::ostream& o) {
      o << svg::heatmap(grid_rows, estimator.name + ": predicted log10 WPI", false);
    });
    out.write("grid_variance.svg",
              [&](std::ostream& o) { o << svg::heatmap(grid_rows, estimator.name + ": kriging variance", true); });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MalformedArtifact) throw;
    log << "warning: no usable grid cells, heatmaps skipped\n";
  }

  log << "samples: " << data.dataset.size() << " (ineligible wells: " << data.ineligible.size() << ")\n";
  if (cokriging) log << "psd projection: " << (fitted.projected ? "yes" : "no") << '\n';
  log << format_comparison_table(rows);
  if (config.back_transform)
    log << "note: back-transformed predictions (10^x) estimate the median, not the mean\n";

  return {report, out.written()};
}

std::vector<ComparisonRow> cmd_compare(std::span<const RunConfig> configs, const std::filesystem::path& out_dir,
                                       std::ostream& log) {
  if (configs.size() < 2) throw Error(ErrorCode::Usage, "compare needs at least two estimator configurations");
  for (const auto& c : configs) validate(c);

  auto canonical = [](const std::filesystem::path& p) { return std::filesystem::weakly_canonical(p); };
  const bool same_input = std::all_of(configs.begin(), configs.end(), [&](const RunConfig& c) {
    return canonical(c.input) == canonical(configs.front().input);
  });

  std::vector<std::string> common;
  if (same_input) {
    std::optional<std::set<std::string>> ids;
    for (const auto& c : configs) {
      const PreparedData d = prepare_data(c, {});
      std::set<std::string> these(d.well_ids.begin(), d.well_ids.end());
      if (!ids) {
        ids = std::move(these);
      } else {
        std::set<std::string> both;
        std::set_intersection(ids->begin(), ids->end(), these.begin(), these.end(),
                              std::inserter(both, both.begin()));
        ids = std::move(both);
      }
    }
    common.assign(ids->begin(), ids->end());
    if (common.empty()) throw Error(ErrorCode::MismatchedSampleSets, "configurations share no usable wells");
  }

  std::vector<CvReport> reports;
  for (const auto& c : configs) {
    const PreparedData d = prepare_data(c, common);
    const FittedEstimator fitted = fit_estimator(c, d.dataset);
    const FoldPlan plan = make_folds(d.dataset.size(), c.cv.k, c.seed);
    reports.push_back(cross_validate(fitted.estimator, d.dataset, plan, c.refit));
    if (reports.back().partial())
      log << "warning: " << fitted.estimator.name << " has " << reports.back().failed_folds.size()
          << " failed folds\n";
  }
  const auto rows = compare_estimators(reports);

  OutputDir out(out_dir);
  out.write("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, rows, true); });
  out.write("comparison.txt", [&](std::ostream& o) { o << format_comparison_table(rows); });
  log << format_comparison_table(rows);
  return rows;
}

}  // namespace cokrige
