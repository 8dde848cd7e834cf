#include "cokrige/crossval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>

#include "cokrige/csv.hpp"
#include "cokrige/error.hpp"
#include "cokrige/kriging.hpp"

namespace cokrige {

std::uint64_t SplitMix64::next() noexcept {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

std::vector<std::vector<std::size_t>> FoldPlan::folds() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
  return out;
}

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::InvalidK, "cross-validation needs at least two samples");
  FoldPlan plan;
  plan.seed = seed;
  plan.assignments.resize(n);
  if (k == kLeaveOneOut) {
    plan.k = n;
    plan.leave_one_out = true;
    std::iota(plan.assignments.begin(), plan.assignments.end(), std::size_t{0});
    return plan;
  }
  if (k < 2 || k > n)
    throw Error(ErrorCode::InvalidK, "fold count " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  plan.k = k;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  for (std::size_t p = 0; p < n; ++p) plan.assignments[order[p]] = p % k;
  return plan;
}

ErrorStats error_stats(std::span<const double> residuals) {
  if (residuals.empty())
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double sum = 0.0, sum_sq = 0.0;
  for (double r : residuals) {
    sum += r;
    sum_sq += r * r;
  }
  const double n = static_cast<double>(residuals.size());
  return {sum / n, std::sqrt(sum_sq / n)};
}

namespace {

struct FoldOutcome {
  std::vector<Residual> residuals;
  bool failed = false;
};

std::vector<SpatialSample> without(std::span<const SpatialSample> samples, const std::vector<bool>& held_out) {
  std::vector<SpatialSample> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!held_out[i]) out.push_back(samples[i]);
  return out;
}

double cutoff_for(const EstimatorConfig& estimator, std::span<const SpatialSample> samples) {
  return estimator.cutoff > 0.0 ? estimator.cutoff : default_cutoff(samples);
}

FoldOutcome run_fold(const EstimatorConfig& estimator, const MultivariateDataset& data,
                     const std::vector<std::size_t>& fold, RefitPolicy refit) {
  FoldOutcome outcome;
  std::vector<bool> held_out(data.primary.size(), false);
  for (std::size_t i : fold) held_out[i] = true;
  const std::vector<SpatialSample> primary = without(data.primary, held_out);

  auto record = [&](std::size_t i, double predicted) {
    const double truth = data.primary[i].value;
    outcome.residuals.push_back({i, truth, predicted, truth - predicted});
  };

  if (estimator.kind == EstimatorKind::Ok) {
    VariogramModel model = estimator.model;
    if (refit == RefitPolicy::RefitPerFold) {
      const auto empirical =
          empirical_variogram(primary, cutoff_for(estimator, primary), estimator.n_bins, Execution::Serial);
      model = fit_model(empirical, estimator.structure, estimator.model).model;
    }
    const OrdinaryKriging kriger(primary, model);
    for (std::size_t i : fold) record(i, kriger.predict(data.primary[i].location, false).prediction);
    return outcome;
  }

  LmcModel lmc = estimator.lmc;
  if (refit == RefitPolicy::RefitPerFold) {
    MultivariateDataset training{primary, without(data.secondary, held_out), data.secondary_name, true};
    const double cutoff = cutoff_for(estimator, primary);
    const auto dp = empirical_variogram(training.primary, cutoff, estimator.n_bins, Execution::Serial);
    const auto ds = empirical_variogram(training.secondary, cutoff, estimator.n_bins, Execution::Serial);
    const auto dc = empirical_cross_variogram(training, cutoff, estimator.n_bins, Execution::Serial);
    lmc = fit_lmc(dp, ds, dc, estimator.structure).model;
  }
  const std::vector<SpatialSample> secondary = estimator.secondary_at_target == SecondaryAtTarget::Retain
                                                   ? data.secondary
                                                   : without(data.secondary, held_out);
  const CoKriging kriger(primary, secondary, lmc);
  for (std::size_t i : fold) record(i, kriger.predict(data.primary[i].location, false).prediction);
  return outcome;
}

}  // namespace

CvReport cross_validate(const EstimatorConfig& estimator, const MultivariateDataset& data, const FoldPlan& plan,
                        RefitPolicy refit, Execution execution) {
  if (plan.assignments.size() != data.primary.size())
    throw Error(ErrorCode::InvalidK, "fold plan covers " + std::to_string(plan.assignments.size()) +
                                         " samples but the dataset has " + std::to_string(data.primary.size()));
  if (estimator.kind == EstimatorKind::Ck) require_colocated(data);

  const auto start = std::chrono::steady_clock::now();
  const auto folds = plan.folds();
  std::vector<FoldOutcome> outcomes(folds.size());

  auto work = [&](std::size_t f) {
    if (folds[f].empty()) return;
    try {
      outcomes[f] = run_fold(estimator, data, folds[f], refit);
    } catch (const std::exception&) {
      outcomes[f] = {{}, true};
    }
  };
  const auto count = static_cast<std::ptrdiff_t>(folds.size());
  if (execution == Execution::Serial) {
    for (std::ptrdiff_t f = 0; f < count; ++f) work(static_cast<std::size_t>(f));
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t f = 0; f < count; ++f) work(static_cast<std::size_t>(f));
  }

  CvReport report;
  report.estimator_name = estimator.name;
  report.n = data.primary.size();
  report.fit_objective = estimator.fit_objective;
  for (std::size_t f = 0; f < outcomes.size(); ++f) {
    if (outcomes[f].failed) {
      report.failed_folds.push_back(f);
      continue;
    }
    report.residuals.insert(report.residuals.end(), outcomes[f].residuals.begin(), outcomes[f].residuals.end());
  }
  std::sort(report.residuals.begin(), report.residuals.end(),
            [](const Residual& a, const Residual& b) { return a.index < b.index; });
  std::vector<double> r;
  r.reserve(report.residuals.size());
  for (const auto& res : report.residuals) r.push_back(res.residual);
  const ErrorStats stats = error_stats(r);
  report.me = stats.me;
  report.rmse = stats.rmse;
  report.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<ComparisonRow> compare_estimators(std::span<const CvReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::Usage, "nothing to compare");
  const CvReport& first = reports.front();
  std::map<std::size_t, double> truth;
  for (const auto& r : first.residuals) truth[r.index] = r.truth;
  for (const auto& report : reports) {
    if (report.n != first.n)
      throw Error(ErrorCode::MismatchedSampleSets, "reports cover " + std::to_string(first.n) + " and " +
                                                       std::to_string(report.n) + " samples");
    for (const auto& r : report.residuals) {
      const auto it = truth.find(r.index);
      if (it != truth.end() && it->second != r.truth)
        throw Error(ErrorCode::MismatchedSampleSets,
                    "sample " + std::to_string(r.index) + " has different true values across reports");
    }
  }

  std::vector<ComparisonRow> rows;
  for (const auto& report : reports)
    rows.push_back({report.estimator_name, report.me, report.rmse, report.wall_clock, report.fit_objective,
                    report.partial()});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.rmse < b.rmse; });
  return rows;
}

void write_cv_report_csv(std::ostream& out, const CvReport& report) {
  out << "# estimator=" << report.estimator_name << " n=" << report.n << " me=" << csv::format_double(report.me)
      << " rmse=" << csv::format_double(report.rmse) << " failed_folds=" << report.failed_folds.size() << '\n';
  out << "index,true,predicted,residual\n";
  for (const auto& r : report.residuals)
    out << r.index << ',' << csv::format_double(r.truth) << ',' << csv::format_double(r.predicted) << ','
        << csv::format_double(r.residual) << '\n';
}

std::vector<Residual> read_cv_report_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const auto index = table.column("index"), truth = table.column("true"), predicted = table.column("predicted"),
             residual = table.column("residual");
  if (!index || !truth || !predicted || !residual)
    throw Error(ErrorCode::MalformedArtifact, "CV report lacks index,true,predicted,residual");
  std::vector<Residual> out;
  for (const auto& row : table.rows) {
    if (row.size() < table.header.size()) throw Error(ErrorCode::MalformedArtifact, "short CV report row");
    const auto i = csv::parse_double(row[*index]);
    const auto t = csv::parse_double(row[*truth]);
    const auto p = csv::parse_double(row[*predicted]);
    const auto r = csv::parse_double(row[*residual]);
    if (!i || !t || !p || !r || *i < 0) throw Error(ErrorCode::MalformedArtifact, "unparseable CV report row");
    out.push_back({static_cast<std::size_t>(*i), *t, *p, *r});
  }
  return out;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows, bool with_timing) {
  out << "estimator,Mean Error,RMSE,Running Time,Fit Objective\n";
  for (const auto& row : rows)
    out << csv::escape(row.estimator) << ',' << csv::format_double(row.me) << ',' << csv::format_double(row.rmse)
        << ',' << (with_timing ? csv::format_double(row.wall_clock) : std::string()) << ','
        << csv::format_double(row.fit_objective) << '\n';
}

std::vector<ComparisonRow> read_comparison_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const auto name = table.column("estimator"), me = table.column("Mean Error"), rmse = table.column("RMSE"),
             time = table.column("Running Time"), objective = table.column("Fit Objective");
  if (!name || !me || !rmse) throw Error(ErrorCode::MalformedArtifact, "comparison CSV lacks estimator,Mean Error,RMSE");
  std::vector<ComparisonRow> rows;
  for (const auto& row : table.rows) {
    if (row.size() < table.header.size()) throw Error(ErrorCode::MalformedArtifact, "short comparison row");
    ComparisonRow r;
    r.estimator = row[*name];
    const auto m = csv::parse_double(row[*me]), s = csv::parse_double(row[*rmse]);
    if (!m || !s) throw Error(ErrorCode::MalformedArtifact, "unparseable comparison row");
    r.me = *m;
    r.rmse = *s;
    r.wall_clock = time ? csv::parse_double(row[*time]).value_or(std::numeric_limits<double>::quiet_NaN()) : 0.0;
    r.fit_objective = objective ? csv::parse_double(row[*objective]).value_or(0.0) : 0.0;
    rows.push_back(r);
  }
  return rows;
}

std::string format_comparison_table(std::span<const ComparisonRow> rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %12s %10s %14s\n", "", "Mean Error", "RMSE", "Running Time");
  out += line;
  for (const auto& row : rows) {
    char time[32];
    if (std::isfinite(row.wall_clock))
      std::snprintf(time, sizeof(time), "%.2f sec", row.wall_clock);
    else
      std::snprintf(time, sizeof(time), "-");
    std::snprintf(line, sizeof(line), "%-22s %12.4f %10.3f %14s%s\n", row.estimator.c_str(), row.me, row.rmse, time,
                  row.partial ? "  (partial)" : "");
    out += line;
  }
  return out;
}

}  // namespace cokrige
