#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace fot::testing {

double parallel_lambda(const std::vector<double>& nu, const std::vector<bool>& active,
                       const std::vector<bool>& resetting, double u0) {
  // Largest flow the configuration can absorb at label derivative lam.
  auto capacity = [&](double lam, bool upper) {
    double total = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (!active[i]) continue;
      if (resetting[i]) {
        total += nu[i] * lam;
      } else if (lam > 1.0) {
        total += nu[i] * lam;
      } else if (upper) {
        total += nu[i];
      }
    }
    return total;
  };
  if (capacity(1.0, false) > u0) {
    // Only queued arcs carry flow and their queues shrink.
    return u0 / (capacity(1.0, false));
  }
  if (capacity(1.0, true) >= u0) return 1.0;
  double lo = 1.0, hi = 1.0;
  while (capacity(hi, false) < u0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (capacity(mid, false) < u0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<ReferencePhase> parallel_trajectory(const std::vector<double>& tau,
                                                const std::vector<double>& nu, double u0,
                                                double horizon) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<ReferencePhase> phases;
  double theta = 0.0;
  double lt = *std::min_element(tau.begin(), tau.end());
  while (true) {
    const double gap = lt - theta;  // queue-free travel time plus delay
    std::vector<bool> active(tau.size()), resetting(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
      active[i] = gap >= tau[i];
      resetting[i] = gap > tau[i];
    }
    const double lam = parallel_lambda(nu, active, resetting, u0);
    if (lam < 1.0) throw std::runtime_error("shrinking queues are outside this reference");
    double next = inf;
    if (lam > 1.0) {
      for (std::size_t i = 0; i < tau.size(); ++i) {
        if (tau[i] > gap) next = std::min(next, theta + (tau[i] - gap) / (lam - 1.0));
      }
    }
    phases.push_back({theta, next, lt, lam});
    if (next == inf || next >= horizon) break;
    lt += lam * (next - theta);
    theta = next;
  }
  return phases;
}

PacketOutcome fixed_point_packets(const PacketInstance& pinst, const PacketProfile& prof) {
  const Instance& inst = pinst.base;
  const std::size_t n = pinst.packet_count;
  std::vector<std::vector<double>> entry(n);
  for (std::size_t p = 0; p < n; ++p) {
    entry[p].assign(prof.paths[p].size(), std::numeric_limits<double>::quiet_NaN());
    entry[p][0] = pinst.release(p + 1);
  }
  PacketOutcome out;
  out.packets.resize(n);
  for (std::size_t sweep = 0;; ++sweep) {
    std::vector<std::vector<std::tuple<double, std::size_t, std::size_t>>> queue(inst.num_arcs());
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t h = 0; h < entry[p].size() && !std::isnan(entry[p][h]); ++h) {
        queue[prof.paths[p][h]].emplace_back(entry[p][h], p, h);
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      out.packets[p].release = pinst.release(p + 1);
      out.packets[p].hops.assign(prof.paths[p].size(), PacketHop{});
    }
    bool changed = false;
    for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
      auto& q = queue[e];
      std::sort(q.begin(), q.end());
      double free_at = -std::numeric_limits<double>::infinity();
      for (auto [t, p, h] : q) {
        PacketHop hop;
        hop.arc = e;
        hop.entry = t;
        hop.proc_start = std::max(t, free_at);
        hop.proc_end = hop.proc_start + pinst.beta / inst.arc(e).nu;
        hop.tail_arrival = hop.proc_end + inst.arc(e).tau;
        free_at = hop.proc_end;
        out.packets[p].hops[h] = hop;
        if (h + 1 < entry[p].size()) {
          if (!(entry[p][h + 1] == hop.tail_arrival)) changed = true;
          entry[p][h + 1] = hop.tail_arrival;
        } else {
          out.packets[p].arrival = hop.tail_arrival;
        }
      }
    }
    if (!changed) break;
    if (sweep > 10 * n * inst.num_arcs() + 10) throw std::runtime_error("no fixed point");
  }
  return out;
}

double queue_from_inflow(const PiecewiseLinear& inflow, double nu, double xi) {
  const double f = inflow(xi);
  double best = 0.0;
  for (const auto& p : inflow.points()) {
    if (p.x > xi) break;
    best = std::max(best, f - p.left - nu * (xi - p.x));
    best = std::max(best, f - p.value - nu * (xi - p.x));
  }
  return best;
}

LabelVector path_enumeration_labels(const Instance& inst, const Outcome& out, double theta) {
  LabelVector best(inst.num_nodes(), std::numeric_limits<double>::infinity());
  std::vector<bool> on_path(inst.num_nodes(), false);
  auto walk = [&](auto&& self, std::size_t v, double t) -> void {
    best[v] = std::min(best[v], t);
    on_path[v] = true;
    for (std::size_t e : inst.out_arcs(v)) {
      const Arc& a = inst.arc(e);
      if (on_path[a.head]) continue;
      self(self, a.head, t + a.tau + out.queue(e, t) / a.nu);
    }
    on_path[v] = false;
  };
  walk(walk, inst.source(), theta);
  return best;
}

}  // namespace fot::testing
