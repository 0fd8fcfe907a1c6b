#include <benchmark/benchmark.h>

#include "liketrial/design.hpp"
#include "liketrial/evidence.hpp"
#include "liketrial/normal.hpp"
#include "liketrial/random.hpp"
#include "liketrial/simulator.hpp"
#include "liketrial/trial.hpp"

namespace {

using namespace liketrial;

void BM_NormCdf(benchmark::State& state) {
  double x = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(norm_cdf(x));
    x = x > 8.0 ? -8.0 : x + 0.001;
  }
}
BENCHMARK(BM_NormCdf);

void BM_NormSfLog(benchmark::State& state) {
  double x = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(norm_sf_log(x));
    x = x > 40.0 ? -8.0 : x + 0.001;
  }
}
BENCHMARK(BM_NormSfLog);

void BM_NormQuantile(benchmark::State& state) {
  double p = 1e-12;
  for (auto _ : state) {
    benchmark::DoNotOptimize(norm_quantile(p));
    p = p > 0.999 ? 1e-12 : p + 1e-4;
  }
}
BENCHMARK(BM_NormQuantile);

void BM_DirectionalLr(benchmark::State& state) {
  double theta = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(directional_lr(theta, 0.5, 0.25));
    theta = theta > 2.0 ? -1.0 : theta + 0.0001;
  }
}
BENCHMARK(BM_DirectionalLr);

void BM_AddObservation(benchmark::State& state) {
  const TrialDesign design(DesignParams::reference());
  RandomStream stream = RandomStream::substream(1, 0);
  TrialState trial = new_trial(design);
  for (auto _ : state) {
    if (trial.stopped()) trial = new_trial(design);
    trial = add_observation(std::move(trial), 0.5 + stream.standard_normal());
  }
}
BENCHMARK(BM_AddObservation);

void BM_SimulateTrial(benchmark::State& state) {
  const TrialDesign design(DesignParams::reference());
  RandomStream stream = RandomStream::substream(1, 0);
  const double theta = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_trial(theta, design, stream));
}
BENCHMARK(BM_SimulateTrial)->Arg(-100)->Arg(50)->Arg(200);

void BM_RunBatch(benchmark::State& state) {
  const SimulationConfig config = SimulationConfig::reference(10'000, 1);
  const ParallelOptions parallel{static_cast<unsigned>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(config, parallel));
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_RunBatch)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
