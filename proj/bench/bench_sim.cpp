// OpenMP trial runner against the serial reference on the classical replacer pair.
#include <benchmark/benchmark.h>

#include "seqchan/sim.hpp"

namespace {

seqchan::SimulationPlan makePlan(std::size_t n, std::size_t trials) {
  using namespace seqchan;
  auto replacer = [](double p) {
    const double d[] = {1.0 - p, p};
    return zoo::replacer(DensityMatrix(ComplexMatrix::diagonal(std::span<const double>(d))), 2);
  };
  static const SprtStrategy base = buildSprt(replacer(0.2), replacer(0.8), 400, 0.08);
  SimulationPlan plan;
  plan.strategy = base;
  setThresholds(plan.strategy, n, 0.08);
  plan.trials = trials;
  plan.baseSeed = 1;
  return plan;
}

void BM_RunTrials(benchmark::State& state) {
  const auto plan = makePlan(static_cast<std::size_t>(state.range(0)), 1000);
  for (auto _ : state) benchmark::DoNotOptimize(seqchan::runTrials(plan));
  state.SetItemsProcessed(state.iterations() * 2000);
}

void BM_RunTrialsSerial(benchmark::State& state) {
  const auto plan = makePlan(static_cast<std::size_t>(state.range(0)), 1000);
  for (auto _ : state) benchmark::DoNotOptimize(seqchan::runTrialsSerial(plan));
  state.SetItemsProcessed(state.iterations() * 2000);
}

}  // namespace

BENCHMARK(BM_RunTrials)->Arg(100)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunTrialsSerial)->Arg(100)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
