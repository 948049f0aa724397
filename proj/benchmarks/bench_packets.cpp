#include <benchmark/benchmark.h>

#include "common.h"
#include "fot/packets.h"

namespace {

fot::PacketProfile round_robin(const fot::Instance& inst, std::size_t count) {
  const auto paths = fot::simple_paths(inst);
  fot::PacketProfile prof;
  for (std::size_t k = 0; k < count; ++k) prof.paths.push_back(paths[k % paths.size()]);
  return prof;
}

void BM_SimulatePackets(benchmark::State& state) {
  const auto inst = fot::bench::layered(3, 3);
  const auto count = static_cast<std::size_t>(state.range(0));
  const fot::PacketInstance pinst{inst, 0.25, count};
  const auto prof = round_robin(inst, count);
  for (auto _ : state) benchmark::DoNotOptimize(fot::simulate_packets(pinst, prof));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(count));
}
BENCHMARK(BM_SimulatePackets)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BestResponse(benchmark::State& state) {
  const auto inst = fot::bench::parallel(4, 3.0);
  const fot::PacketInstance pinst{inst, 0.25, 200};
  const auto prof = round_robin(inst, 200);
  const auto mode = state.range(0) ? fot::BestResponseMode::heuristic : fot::BestResponseMode::exact;
  for (auto _ : state) benchmark::DoNotOptimize(fot::best_response(pinst, prof, 150, {mode}));
}
BENCHMARK(BM_BestResponse)->Arg(0)->Arg(1);

void BM_PacketEquilibrium(benchmark::State& state) {
  const auto inst = fot::bench::parallel(4, 3.0);
  const fot::PacketInstance pinst{inst, 0.25, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(fot::find_packet_equilibrium(pinst));
}
BENCHMARK(BM_PacketEquilibrium)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace
