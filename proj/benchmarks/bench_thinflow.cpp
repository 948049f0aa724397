#include <benchmark/benchmark.h>

#include "common.h"
#include "fot/thinflow.h"

namespace {

void BM_SolveThinFlowLayered(benchmark::State& state) {
  const auto inst = fot::bench::layered(static_cast<int>(state.range(0)), 3);
  const auto l = fot::empty_network_labels(inst);
  auto cfg = fot::classify_configuration(inst, l, fot::GeneralizedSubnetwork::full(inst));
  for (auto _ : state) benchmark::DoNotOptimize(fot::solve_thin_flow(inst, cfg));
}
BENCHMARK(BM_SolveThinFlowLayered)->Arg(2)->Arg(4)->Arg(8);

void BM_ThinFlowOracleParallel(benchmark::State& state) {
  const auto inst = fot::bench::parallel(static_cast<int>(state.range(0)), 3.0);
  fot::Configuration cfg{fot::ArcSet::all(inst.num_arcs()), fot::ArcSet(inst.num_arcs())};
  cfg.resetting.insert(0);
  for (auto _ : state) benchmark::DoNotOptimize(fot::thin_flow_oracle(inst, cfg));
}
BENCHMARK(BM_ThinFlowOracleParallel)->Arg(2)->Arg(4)->Arg(6);

}  // namespace
