#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fot/instance.h"
#include "fot/packets.h"
#include "fot/profile.h"
#include "fot/thinflow.h"

namespace fot::testing {

using Rng = std::mt19937_64;

/// Multiple of 1/denominator drawn uniformly from [lo, hi].
double dyadic(Rng& rng, double lo, double hi, int denominator = 8);

/// Random instance whose nodes all lie on some s-t path. Node 0 is the
/// source and node n-1 the sink. Parameters are dyadic so event times stay
/// exact in double precision.
Instance random_instance(Rng& rng, std::size_t max_nodes, std::size_t max_arcs,
                         bool allow_cycles = true);

/// Parallel-arc instance with the given transit times and capacities.
Instance parallel_instance(const std::vector<double>& tau, const std::vector<double>& nu,
                           double u0);

/// Labels whose classification is a valid configuration: Bellman labels
/// with random queue delays, projected onto the valid set.
/// Shortest-path labels for arc costs tau_e plus a random nonnegative
/// delay; every node keeps an active in-arc.
LabelVector random_bellman_labels(Rng& rng, const Instance& inst);
LabelVector random_valid_labels(Rng& rng, const Instance& inst);
Configuration random_valid_configuration(Rng& rng, const Instance& inst);

std::vector<std::size_t> random_simple_path(Rng& rng, const Instance& inst);
PacketProfile random_packet_profile(Rng& rng, const Instance& inst, std::size_t count);

/// Interval classes tiling [0, horizon) at total rate u0 plus a few atoms,
/// with nonnegative affine waiting.
StrategyProfile random_strategy_profile(Rng& rng, const Instance& inst, double horizon,
                                        bool with_atoms = true);

}  // namespace fot::testing
