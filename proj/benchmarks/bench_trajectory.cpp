#include <benchmark/benchmark.h>

#include "common.h"
#include "fot/trajectory.h"

namespace {

void BM_TrajectoryParallel(benchmark::State& state) {
  const auto inst = fot::bench::parallel(static_cast<int>(state.range(0)), 3.0);
  const auto start = fot::empty_network_labels(inst);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fot::compute_trajectory(inst, fot::GeneralizedSubnetwork::full(inst), start));
  }
}
BENCHMARK(BM_TrajectoryParallel)->Arg(4)->Arg(16)->Arg(64);

void BM_TrajectoryLayered(benchmark::State& state) {
  const auto inst = fot::bench::layered(static_cast<int>(state.range(0)), 3);
  const auto start = fot::empty_network_labels(inst);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fot::compute_trajectory(inst, fot::GeneralizedSubnetwork::full(inst), start));
  }
}
BENCHMARK(BM_TrajectoryLayered)->Arg(2)->Arg(3)->Arg(4);

}  // namespace
