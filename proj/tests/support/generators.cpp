#include "generators.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "fot/trajectory.h"

namespace fot::testing {

double dyadic(Rng& rng, double lo, double hi, int denominator) {
  const auto a = static_cast<long>(std::ceil(lo * denominator));
  const auto b = static_cast<long>(std::floor(hi * denominator));
  std::uniform_int_distribution<long> pick(a, b);
  return static_cast<double>(pick(rng)) / denominator;
}

Instance random_instance(Rng& rng, std::size_t max_nodes, std::size_t max_arcs,
                         bool allow_cycles) {
  std::uniform_int_distribution<std::size_t> node_count(2, max_nodes);
  const std::size_t n = node_count(rng);
  std::vector<std::string> names;
  for (std::size_t v = 0; v < n; ++v) names.push_back("v" + std::to_string(v));
  names.front() = "s";
  names.back() = "t";

  // A backbone keeps every node on an s-t path.
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  std::vector<std::size_t> order(n - 2);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t prev = 0;
  for (std::size_t v : order) {
    ends.emplace_back(prev, v);
    prev = v;
  }
  ends.emplace_back(prev, n - 1);
  const std::size_t target = std::max(ends.size(), std::min(max_arcs, ends.size() + n));
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  std::size_t attempts = 0;
  while (ends.size() < target && attempts++ < 100) {
    const std::size_t a = any(rng);
    const std::size_t b = any(rng);
    if (a == b || b == 0 || a == n - 1) continue;
    if (!allow_cycles && a > b) continue;
    ends.emplace_back(a, b);
  }
  std::vector<ArcSpec> arcs;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    arcs.push_back({"a" + std::to_string(i), names[ends[i].first], names[ends[i].second],
                    dyadic(rng, 0.25, 4.0, 4), dyadic(rng, 0.5, 3.0, 4)});
  }
  return Instance(names, arcs, "s", "t", dyadic(rng, 0.5, 4.0, 4));
}

Instance parallel_instance(const std::vector<double>& tau, const std::vector<double>& nu,
                           double u0) {
  std::vector<ArcSpec> arcs;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    arcs.push_back({"e" + std::to_string(i + 1), "s", "t", tau[i], nu[i]});
  }
  return Instance({"s", "t"}, arcs, "s", "t", u0);
}

LabelVector random_bellman_labels(Rng& rng, const Instance& inst) {
  std::vector<double> delay(inst.num_arcs());
  std::bernoulli_distribution queued(0.5);
  for (auto& d : delay) d = queued(rng) ? dyadic(rng, 0.0, 3.0, 4) : 0.0;
  // Bellman labels with arc costs tau + delay.
  LabelVector l(inst.num_nodes(), std::numeric_limits<double>::infinity());
  l[inst.source()] = 0.0;
  for (std::size_t round = 0; round < inst.num_nodes(); ++round) {
    for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
      const Arc& a = inst.arc(e);
      l[a.head] = std::min(l[a.head], l[a.tail] + a.tau + delay[e]);
    }
  }
  return l;
}

LabelVector random_valid_labels(Rng& rng, const Instance& inst) {
  return project_to_valid(inst, random_bellman_labels(rng, inst));
}

Configuration random_valid_configuration(Rng& rng, const Instance& inst) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto l = random_valid_labels(rng, inst);
    auto cfg = classify_configuration(inst, l, GeneralizedSubnetwork::full(inst));
    if (is_valid_configuration(inst, cfg).valid) return cfg;
  }
  throw std::runtime_error("no valid configuration found");
}

std::vector<std::size_t> random_simple_path(Rng& rng, const Instance& inst) {
  const auto paths = simple_paths(inst);
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  return paths[pick(rng)];
}

PacketProfile random_packet_profile(Rng& rng, const Instance& inst, std::size_t count) {
  const auto paths = simple_paths(inst);
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  PacketProfile prof;
  for (std::size_t k = 0; k < count; ++k) prof.paths.push_back(paths[pick(rng)]);
  return prof;
}

StrategyProfile random_strategy_profile(Rng& rng, const Instance& inst, double horizon,
                                        bool with_atoms) {
  const auto paths = simple_paths(inst);
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  const double u0 = inst.inflow_rate();
  StrategyProfile profile;
  auto waiting_for = [&](const std::vector<std::size_t>& path, double a, double b) {
    std::vector<AffineWait> w;
    std::bernoulli_distribution waits(0.3);
    for (std::size_t i = 0; i <= path.size(); ++i) {
      if (!waits(rng)) {
        w.push_back({});
        continue;
      }
      // Affine and nonnegative on [a, b].
      const double slope = dyadic(rng, -0.5, 0.5, 4);
      const double at_a = dyadic(rng, 0.0, 1.0, 4);
      const double at_b = at_a + slope * (b - a);
      const double low = std::min(at_a, at_b);
      const double lift = low < 0.0 ? -low : 0.0;
      w.push_back({at_a + lift - slope * a, slope});
    }
    return w;
  };
  double t = 0.0;
  while (t < horizon) {
    const double end = std::min(horizon, t + dyadic(rng, 0.25, 2.0, 4));
    // Split the rate u0 between up to two paths.
    std::bernoulli_distribution split(0.5);
    if (split(rng)) {
      const double share = dyadic(rng, 0.25, 0.75, 4);
      for (double rate : {share * u0, (1.0 - share) * u0}) {
        auto path = paths[pick(rng)];
        auto w = waiting_for(path, t, end);
        profile.push_back({path, EntryInterval{t, end, rate}, std::move(w), ""});
      }
    } else {
      auto path = paths[pick(rng)];
      auto w = waiting_for(path, t, end);
      profile.push_back({path, EntryInterval{t, end, u0}, std::move(w), ""});
    }
    t = end;
  }
  if (with_atoms) {
    std::uniform_int_distribution<int> atoms(0, 2);
    for (int i = atoms(rng); i > 0; --i) {
      auto path = paths[pick(rng)];
      const double at = dyadic(rng, 0.0, horizon, 4);
      auto w = waiting_for(path, at, at);
      profile.push_back({path, EntryAtom{at, dyadic(rng, 0.25, 2.0, 4)}, std::move(w), ""});
    }
  }
  return profile;
}

}  // namespace fot::testing
