#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cokrige/error.hpp"
#include "cokrige/pipeline.hpp"
#include "cokrige/svg.hpp"
#include "cokrige/synth.hpp"

namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

// Command-line values that override the config file.
struct Overrides {
  std::vector<std::string> configs;
  std::string input, secondary, structure, cv, grid, out, refit;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> top_n;
  std::optional<double> tolerance;
  bool back_transform = false;
  bool timing = false;

  Settings settings() const {
    Settings s;
    auto add = [&](const char* key, const std::string& value) {
      if (!value.empty()) s.emplace_back(key, value);
    };
    add("input", input);
    add("secondary", secondary);
    add("structure", structure);
    add("cv", cv);
    add("grid", grid);
    add("out", out);
    add("refit", refit);
    if (seed) s.emplace_back("seed", std::to_string(*seed));
    if (top_n) s.emplace_back("top_n", std::to_string(*top_n));
    if (tolerance) {
      std::ostringstream t;
      t.precision(17);
      t << *tolerance;
      s.emplace_back("colocation_tolerance", t.str());
    }
    if (back_transform) s.emplace_back("back_transform", "true");
    if (timing) s.emplace_back("report_timing", "true");
    return s;
  }
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--input", o.input, "Completion CSV");
  cmd->add_option("--secondary", o.secondary, "Secondary variable: fluid, proppant or none");
  cmd->add_option("--structure", o.structure, "spherical, exponential or gaussian");
  cmd->add_option("--cv", o.cv, "loo or k=<int>");
  cmd->add_option("--seed", o.seed, "Fold assignment seed");
  cmd->add_option("--refit", o.refit, "fixed or per_fold");
  cmd->add_option("--colocation-tolerance", o.tolerance, "Co-location tolerance in meters");
}

cokrige::RunConfig resolve(const std::string& config_path, const Overrides& o) {
  cokrige::RunConfig config;
  if (!config_path.empty()) config = cokrige::load_config(config_path);
  const Settings s = o.settings();
  cokrige::apply_settings(config, s);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-performance-index kriging and co-kriging"};
  app.require_subcommand(1);

  Overrides run_opts;
  std::string run_config;
  auto* run = app.add_subcommand("run", "Full pipeline: variograms, kriging maps and cross-validation");
  run->add_option("--config", run_config, "Key-value config file");
  add_common(run, run_opts);
  run->add_option("--grid", run_opts.grid, "Grid size as nx,ny");
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_option("--top", run_opts.top_n, "Number of top grid cells to report");
  run->add_flag("--back-transform", run_opts.back_transform, "Write 10^x predictions (median, biased for the mean)");
  run->add_flag("--timing", run_opts.timing, "Include CV wall-clock in comparison.csv");

  Overrides cmp_opts;
  std::vector<std::string> cmp_secondaries;
  auto* compare = app.add_subcommand("compare", "Cross-validate several estimators and rank them by RMSE");
  compare->add_option("--config", cmp_opts.configs, "Config file per estimator (repeatable)");
  add_common(compare, cmp_opts);
  compare->add_option("--estimators", cmp_secondaries, "Secondary choices, e.g. none fluid proppant")
      ->delimiter(',');
  compare->add_option("--out", cmp_opts.out, "Output directory");

  std::string synth_out = "data";
  std::uint64_t synth_seed = cokrige::kBundledSeed;
  auto* synth = app.add_subcommand("synth", "Write the bundled synthetic well dataset");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--seed", synth_seed, "Generator seed");

  cokrige::svg::RenderRequest request;
  std::string kind = "variogram";
  auto* render = app.add_subcommand("render", "Render an SVG from a CSV artifact");
  render->add_option("--kind", kind, "variogram, bubble or heatmap")->required();
  render->add_option("--data", request.data, "Input CSV")->required();
  render->add_option("--model", request.model, "model.txt for variogram curves");
  render->add_option("--component", request.component, "primary, secondary or cross");
  render->add_flag("--variance", request.variance, "Heatmap of the variance column");
  render->add_option("--output", request.output, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cokrige::exit_code(cokrige::ErrorCode::Usage);
  }

  try {
    if (*run) {
      cokrige::cmd_run(resolve(run_config, run_opts), std::cout);
    } else if (*compare) {
      std::vector<cokrige::RunConfig> configs;
      for (const auto& path : cmp_opts.configs) configs.push_back(resolve(path, cmp_opts));
      for (const auto& s : cmp_secondaries) {
        Overrides o = cmp_opts;
        o.secondary = s;
        configs.push_back(resolve("", o));
      }
      const std::string out = cmp_opts.out.empty() ? "out" : cmp_opts.out;
      cokrige::cmd_compare(configs, out, std::cout);
    } else if (*synth) {
      const auto path = cokrige::make_bundled_dataset(synth_out, synth_seed);
      std::cout << "wrote " << path.string() << '\n';
    } else if (*render) {
      request.kind = cokrige::svg::parse_artifact_kind(kind);
      cokrige::svg::render(request);
    }
  } catch (const cokrige::Error& e) {
    std::cerr << "error [" << cokrige::to_string(e.code()) << "]: " << e.what() << '\n';
    return cokrige::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cokrige::exit_code(cokrige::ErrorCode::IoFailure);
  }
  return EXIT_SUCCESS;
}
