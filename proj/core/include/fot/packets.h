#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fot/instance.h"
#include "fot/profile.h"

namespace fot {

class PacketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Packets of mass beta released from the source. Packet k (1-based) leaves
/// the source at beta * k / u0 and stands for the agents entering in
/// ((k-1) beta / u0, k beta / u0].
struct PacketInstance {
  Instance base;
  double beta = 1.0;
  std::size_t packet_count = 1;

  /// Throws PacketError unless beta > 0 and packet_count >= 1.
  void validate() const;
  double release(std::size_t k) const { return beta * static_cast<double>(k) / base.inflow_rate(); }
};

/// paths[k - 1] is the arc-index path of packet k.
struct PacketProfile {
  std::vector<std::vector<std::size_t>> paths;
};

struct PacketHop {
  std::size_t arc = 0;
  double entry = 0.0;
  double proc_start = 0.0;
  double proc_end = 0.0;
  double tail_arrival = 0.0;  // arrival at the head node
};

struct PacketRecord {
  double release = 0.0;
  std::vector<PacketHop> hops;
  double arrival = 0.0;  // at the sink

  /// Time the packet leaves the i-th node of its path (the sink counts as
  /// leaving on arrival).
  double departure(std::size_t i) const { return i == 0 ? release : hops[i - 1].tail_arrival; }
};

struct PacketOutcome {
  std::vector<PacketRecord> packets;  // packets[k - 1]
};

/// Event-driven FIFO simulation. Each arc serves one packet at a time for
/// beta / nu_e, in order of (arc entry time, packet index); served packets
/// then travel tau_e.
PacketOutcome simulate_packets(const PacketInstance& pinst, const PacketProfile& prof);

/// All simple source-sink paths in lexicographic order of arc indices.
/// Throws PacketError when there are more than `cap`.
std::vector<std::vector<std::size_t>> simple_paths(const Instance& inst,
                                                   std::size_t cap = 10'000);

enum class BestResponseMode { exact, heuristic };

struct BestResponseOptions {
  BestResponseMode mode = BestResponseMode::exact;
  std::size_t path_cap = 10'000;
};

struct BestResponse {
  std::vector<std::size_t> path;
  double arrival = 0.0;
};

/// Path minimising packet k's sink arrival when all other packets keep their
/// paths. Exact mode resimulates every simple path and breaks ties by the
/// arc index sequence; heuristic mode runs a label-setting search against
/// the other packets' schedules and resimulates only the chosen path.
BestResponse best_response(const PacketInstance& pinst, const PacketProfile& prof,
                           std::size_t k, const BestResponseOptions& opts = {});

struct EquilibriumStatus {
  bool converged = false;
  std::size_t rounds = 0;
  double max_improvement = 0.0;  // largest improvement found in the last round
};

struct PacketEquilibrium {
  PacketProfile profile;
  EquilibriumStatus status;
};

struct EquilibriumOptions {
  std::size_t max_rounds = 50;
  Tolerance tol;
  BestResponseOptions best_response;
};

/// Greedy initialisation (packet k best-responds among packets 1..k) followed
/// by best-response rounds in index order until no packet improves by more
/// than eta. Convergence is always certified with exact best responses.
PacketEquilibrium find_packet_equilibrium(const PacketInstance& pinst,
                                          const EquilibriumOptions& opts = {});

/// Largest improvement any of the packets 1..limit could make by switching
/// paths (exact best responses).
double best_response_residual(const PacketInstance& pinst, const PacketProfile& prof,
                              std::size_t limit);

/// One interval class per packet whose node waiting reproduces the packet's
/// timings when loaded.
StrategyProfile embed_packets(const PacketInstance& pinst, const PacketProfile& prof,
                              const PacketOutcome& out);

}  // namespace fot
