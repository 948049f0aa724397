#include <benchmark/benchmark.h>

#include "common.h"
#include "fot/loading.h"
#include "fot/trajectory.h"

namespace {

void BM_LoadExactProfile(benchmark::State& state) {
  const auto inst = fot::bench::parallel(static_cast<int>(state.range(0)), 3.0);
  const auto traj = fot::compute_trajectory(inst, fot::GeneralizedSubnetwork::full(inst),
                                            fot::empty_network_labels(inst));
  const auto profile = fot::derive_exact_profile(traj, 30.0);
  for (auto _ : state) benchmark::DoNotOptimize(fot::load_profile(inst, profile));
}
BENCHMARK(BM_LoadExactProfile)->Arg(4)->Arg(16);

void BM_LabelFunctions(benchmark::State& state) {
  const auto inst = fot::bench::layered(static_cast<int>(state.range(0)), 3);
  const auto traj = fot::compute_trajectory(inst, fot::GeneralizedSubnetwork::full(inst),
                                            fot::empty_network_labels(inst));
  const auto out = fot::load_profile(inst, fot::derive_exact_profile(traj, 20.0));
  for (auto _ : state) benchmark::DoNotOptimize(fot::compute_label_functions(out));
}
BENCHMARK(BM_LabelFunctions)->Arg(2)->Arg(3);

}  // namespace
