// Serial vs OpenMP timings for the three parallel kernels.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "cokrige/crossval.hpp"
#include "cokrige/kriging.hpp"
#include "cokrige/synth.hpp"
#include "cokrige/variogram.hpp"

using namespace cokrige;

namespace {

double seconds(const std::function<void()>& body, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

void report(const char* name, const std::function<void(Execution)>& kernel, int repeats) {
  const double serial = seconds([&] { kernel(Execution::Serial); }, repeats);
  const double parallel = seconds([&] { kernel(Execution::Parallel); }, repeats);
  std::printf("%-28s serial %9.4f s  parallel %9.4f s  speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d\n", omp_get_max_threads());

  LmcModel lmc;
  lmc.structure = Structure::Spherical;
  lmc.range = 9000.0;
  lmc.nugget << 0.02, 0.01, 0.01, 0.015;
  lmc.sill << 0.06, 0.04, 0.04, 0.05;

  SynthSpec big;
  big.n_points = 2000;
  big.box = {0.0, 0.0, 30000.0, 20000.0};
  big.lmc = lmc;
  big.seed = 7;
  const MultivariateDataset field = generate_field(big);
  const double cutoff = default_cutoff(field.primary);
  report("empirical variogram n=2000",
         [&](Execution e) { (void)empirical_variogram(field.primary, cutoff, kDefaultBins, e); }, repeats);

  SynthSpec wells = big;
  wells.n_points = kBundledWells;
  const MultivariateDataset data = generate_field(wells);
  const VariogramModel model = lmc.direct(0);
  const GridSpec spec = GridSpec::covering(data.primary, 100, 100);
  report("OK grid 100x100 n=190",
         [&](Execution e) { (void)predict_grid(OkInputs{data.primary, model}, spec, e); }, repeats);
  report("CK grid 100x100 n=190", [&](Execution e) { (void)predict_grid(CkInputs{data, lmc}, spec, e); }, repeats);

  EstimatorConfig ck;
  ck.name = "CK";
  ck.kind = EstimatorKind::Ck;
  ck.lmc = lmc;
  ck.model = model;
  const FoldPlan loo = make_folds(data.size(), kLeaveOneOut, 1);
  report("CK LOO n=190", [&](Execution e) { (void)cross_validate(ck, data, loo, RefitPolicy::FixedModel, e); },
         repeats);
  return 0;
}
