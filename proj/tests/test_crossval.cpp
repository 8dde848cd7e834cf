#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cokrige/crossval.hpp"
#include "cokrige/synth.hpp"
#include "support.hpp"

using namespace cokrige;
using testing::error_of;

namespace {

std::vector<std::size_t> fold_sizes(const FoldPlan& plan) {
  std::vector<std::size_t> sizes;
  for (const auto& f : plan.folds()) sizes.push_back(f.size());
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

MultivariateDataset field(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_points = n;
  spec.box = {0.0, 0.0, 100.0, 100.0};
  spec.lmc.range = 50.0;
  spec.lmc.nugget << 0.05, 0.02, 0.02, 0.05;
  spec.lmc.sill << 1.0, 0.6, 0.6, 0.8;
  spec.seed = seed;
  return generate_field(spec);
}

EstimatorConfig ok_config(const VariogramModel& m) {
  EstimatorConfig e;
  e.name = "OK";
  e.kind = EstimatorKind::Ok;
  e.model = m;
  e.structure = m.structure;
  e.cutoff = 60.0;
  return e;
}

EstimatorConfig ck_config(const LmcModel& lmc) {
  EstimatorConfig e;
  e.name = "CK";
  e.kind = EstimatorKind::Ck;
  e.lmc = lmc;
  e.model = lmc.direct(0);
  e.cutoff = 60.0;
  return e;
}

CvReport report_with(std::string name, std::vector<double> residuals) {
  CvReport r;
  r.estimator_name = std::move(name);
  r.n = residuals.size();
  for (std::size_t i = 0; i < residuals.size(); ++i) r.residuals.push_back({i, 1.0, 1.0 - residuals[i], residuals[i]});
  const auto s = error_stats(residuals);
  r.me = s.me;
  r.rmse = s.rmse;
  return r;
}

}  // namespace

TEST_CASE("splitmix64 reference outputs") {
  SplitMix64 g(1234567);
  CHECK(g.next() == 6457827717110365317ULL);
  CHECK(g.next() == 3203168211198807973ULL);
  CHECK(g.next() == 9817491932198370423ULL);
  CHECK(g.next() == 4593380528125082431ULL);
  CHECK(g.next() == 16408922859458223821ULL);
}

TEST_CASE("bounded draws stay in range") {
  SplitMix64 g(42);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 5})
    for (int i = 0; i < 1000; ++i) CHECK(g.below(bound) < bound);
}

TEST_CASE("fold plans") {
  CHECK(fold_sizes(make_folds(10, 5, 1)) == std::vector<std::size_t>{2, 2, 2, 2, 2});
  const auto loo = make_folds(10, kLeaveOneOut, 1);
  CHECK(loo.leave_one_out);
  CHECK(fold_sizes(loo) == std::vector<std::size_t>(10, 1));
  for (std::size_t i = 0; i < 10; ++i) CHECK(loo.assignments[i] == i);

  const auto a = make_folds(7, 5, 99);
  const auto b = make_folds(7, 5, 99);
  CHECK(fold_sizes(a) == std::vector<std::size_t>{2, 2, 1, 1, 1});
  CHECK(a.assignments == b.assignments);
  CHECK(make_folds(50, 5, 1).assignments != make_folds(50, 5, 2).assignments);

  CHECK(error_of([] { make_folds(10, 1, 0); }) == ErrorCode::InvalidK);
  CHECK(error_of([] { make_folds(10, 11, 0); }) == ErrorCode::InvalidK);
  CHECK(error_of([] { make_folds(1, kLeaveOneOut, 0); }) == ErrorCode::InvalidK);
}

TEST_CASE("every index lands in exactly one fold") {
  for (std::size_t n : {2, 5, 17, 190})
    for (std::size_t k : {2, 3, 5}) {
      if (k > n) continue;
      std::vector<int> seen(n, 0);
      for (const auto& fold : make_folds(n, k, n * 31 + k).folds())
        for (std::size_t i : fold) ++seen[i];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
}

TEST_CASE("error statistics") {
  const std::vector<double> r{1.0, -1.0};
  const auto s = error_stats(r);
  CHECK(s.me == 0.0);
  CHECK(s.rmse == 1.0);
  CHECK(std::isnan(error_stats(std::span<const double>{}).rmse));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.3, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + trial % 40);
    for (auto& x : v) x = z(rng) * (1 + trial % 5);
    const auto e = error_stats(v);
    CHECK(e.rmse * e.rmse >= e.me * e.me - 1e-12);
  }
}

TEST_CASE("constant field cross-validates exactly") {
  std::mt19937_64 rng(2);
  auto d = testing::random_dataset(rng, 15);
  for (auto& s : d.primary) s.value = 4.0;
  const auto report =
      cross_validate(ok_config({0.0, Structure::Spherical, 1.0, 50.0}), d, make_folds(15, kLeaveOneOut, 0));
  CHECK(std::fabs(report.me) < 1e-12);
  CHECK(report.rmse < 1e-12);
}

TEST_CASE("leave-one-out matches an oracle loop") {
  const auto d = field(20, 3);
  const VariogramModel m{0.05, Structure::Spherical, 1.0, 50.0};
  const auto report = cross_validate(ok_config(m), d, make_folds(20, kLeaveOneOut, 0));
  REQUIRE(report.residuals.size() == 20);
  std::vector<double> residuals;
  for (std::size_t i = 0; i < 20; ++i) {
    std::vector<SpatialSample> rest;
    for (std::size_t j = 0; j < 20; ++j)
      if (j != i) rest.push_back(d.primary[j]);
    const double predicted = testing::oracle_ok(rest, m, d.primary[i].location).prediction;
    residuals.push_back(d.primary[i].value - predicted);
    CHECK(report.residuals[i].index == i);
    CHECK(report.residuals[i].residual == doctest::Approx(residuals.back()).epsilon(1e-10));
  }
  const auto s = error_stats(residuals);
  CHECK(report.me == doctest::Approx(s.me).epsilon(1e-10));
  CHECK(report.rmse == doctest::Approx(s.rmse).epsilon(1e-10));
}

TEST_CASE("co-kriging leave-one-out matches an oracle loop") {
  const auto d = field(15, 4);
  LmcModel lmc;
  lmc.range = 50.0;
  lmc.nugget << 0.05, 0.02, 0.02, 0.05;
  lmc.sill << 1.0, 0.6, 0.6, 0.8;
  for (auto policy : {SecondaryAtTarget::Retain, SecondaryAtTarget::Remove}) {
    auto e = ck_config(lmc);
    e.secondary_at_target = policy;
    const auto report = cross_validate(e, d, make_folds(15, kLeaveOneOut, 0));
    for (std::size_t i = 0; i < 15; ++i) {
      std::vector<SpatialSample> p, q;
      for (std::size_t j = 0; j < 15; ++j) {
        if (j != i) p.push_back(d.primary[j]);
        if (j != i || policy == SecondaryAtTarget::Retain) q.push_back(d.secondary[j]);
      }
      const double predicted = testing::oracle_ck(p, q, lmc, d.primary[i].location).prediction;
      CHECK(report.residuals[i].predicted == doctest::Approx(predicted).epsilon(1e-9));
    }
  }
}

TEST_CASE("leave-one-out is invariant to sample order") {
  const auto d = field(25, 5);
  const VariogramModel m{0.05, Structure::Exponential, 1.0, 40.0};
  const auto base = cross_validate(ok_config(m), d, make_folds(25, kLeaveOneOut, 0));

  std::vector<std::size_t> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(6);
  std::shuffle(perm.begin(), perm.end(), rng);
  MultivariateDataset shuffled = d;
  for (std::size_t i = 0; i < 25; ++i) {
    shuffled.primary[i] = d.primary[perm[i]];
    shuffled.secondary[i] = d.secondary[perm[i]];
  }
  const auto moved = cross_validate(ok_config(m), shuffled, make_folds(25, kLeaveOneOut, 0));
  for (std::size_t i = 0; i < 25; ++i)
    CHECK(std::fabs(moved.residuals[i].residual - base.residuals[perm[i]].residual) <= 1e-12);
}

TEST_CASE("serial and parallel folds agree") {
  const auto d = field(40, 7);
  LmcModel lmc;
  lmc.range = 50.0;
  lmc.nugget << 0.05, 0.02, 0.02, 0.05;
  lmc.sill << 1.0, 0.6, 0.6, 0.8;
  const auto plan = make_folds(40, 5, 11);
  for (const auto& e : {ok_config(lmc.direct(0)), ck_config(lmc)}) {
    const auto a = cross_validate(e, d, plan, RefitPolicy::FixedModel, Execution::Serial);
    const auto b = cross_validate(e, d, plan, RefitPolicy::FixedModel, Execution::Parallel);
    for (std::size_t i = 0; i < 40; ++i) CHECK(a.residuals[i].predicted == b.residuals[i].predicted);
    CHECK(a.rmse == b.rmse);
  }
}

TEST_CASE("refit per fold") {
  const auto d = field(60, 8);
  auto e = ok_config({0.05, Structure::Spherical, 1.0, 50.0});
  const auto plan = make_folds(60, 5, 3);
  const auto fixed = cross_validate(e, d, plan, RefitPolicy::FixedModel);
  const auto refit = cross_validate(e, d, plan, RefitPolicy::RefitPerFold);
  CHECK(refit.residuals.size() == 60);
  CHECK_FALSE(refit.partial());
  CHECK(refit.rmse != fixed.rmse);
}

TEST_CASE("failed folds are reported") {
  std::vector<SpatialSample> dup{{{0, 0}, 1.0}, {{0, 0}, 2.0}, {{5, 0}, 3.0}, {{9, 0}, 1.0}};
  MultivariateDataset d;
  d.primary = dup;
  const auto report =
      cross_validate(ok_config({0.0, Structure::Spherical, 1.0, 20.0}), d, make_folds(4, kLeaveOneOut, 0));
  CHECK(report.partial());
  CHECK(report.failed_folds == std::vector<std::size_t>{2, 3});
  CHECK(report.residuals.size() == 2);
}

TEST_CASE("comparison ordering") {
  const std::vector<CvReport> reports{report_with("OK", {0.249, -0.249}), report_with("CK with fluid", {0.232, -0.232}),
                                      report_with("CK with proppant", {0.229, -0.229})};
  const auto rows = compare_estimators(reports);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].estimator == "CK with proppant");
  CHECK(rows[1].estimator == "CK with fluid");
  CHECK(rows[2].estimator == "OK");
  CHECK(rows[0].rmse == doctest::Approx(0.229));

  CHECK(compare_estimators(std::span(reports).first(1)).size() == 1);

  const std::vector<CvReport> mismatched{report_with("a", {1, 2}), report_with("b", {1, 2, 3})};
  CHECK(error_of([&] { compare_estimators(mismatched); }) == ErrorCode::MismatchedSampleSets);
}

TEST_CASE("report files round trip") {
  const auto d = field(20, 9);
  const auto report =
      cross_validate(ok_config({0.05, Structure::Spherical, 1.0, 50.0}), d, make_folds(20, kLeaveOneOut, 0));
  std::stringstream a;
  write_cv_report_csv(a, report);
  const auto back = read_cv_report_csv(a);
  REQUIRE(back.size() == report.residuals.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].index == report.residuals[i].index);
    CHECK(back[i].truth == report.residuals[i].truth);
    CHECK(back[i].predicted == report.residuals[i].predicted);
    CHECK(back[i].residual == report.residuals[i].residual);
  }

  const std::vector<CvReport> reports{report};
  const auto rows = compare_estimators(reports);
  for (bool timing : {true, false}) {
    std::stringstream b;
    write_comparison_csv(b, rows, timing);
    const auto parsed = read_comparison_csv(b);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].estimator == rows[0].estimator);
    CHECK(parsed[0].me == rows[0].me);
    CHECK(parsed[0].rmse == rows[0].rmse);
    CHECK(parsed[0].fit_objective == rows[0].fit_objective);
  }
  CHECK(format_comparison_table(rows).find("RMSE") != std::string::npos);
}
