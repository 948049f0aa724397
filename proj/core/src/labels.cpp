#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include "fot/loading.h"

namespace fot {

PiecewiseLinear arc_exit_function(const Outcome& out, std::size_t e) {
  const Arc& a = out.instance().arc(e);
  const auto z = difference(out.inflow(e), out.queue_output(e));
  return PiecewiseLinear::from_function(z.breakpoints(), [&](double xi) {
    return xi + a.tau + std::max(0.0, z(xi)) / a.nu;
  });
}

LabelVector earliest_arrival_labels(const Instance& inst, const Outcome& out,
                                    double theta) {
  if (theta > out.horizon() + Tolerance{}.eta) {
    std::ostringstream msg;
    msg << "label query at theta=" << theta << " beyond loaded horizon " << out.horizon();
    throw LoadError(msg.str());
  }
  const double inf = std::numeric_limits<double>::infinity();
  LabelVector dist(inst.num_nodes(), inf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  dist[inst.source()] = theta;
  frontier.push({theta, inst.source()});
  std::vector<bool> done(inst.num_nodes(), false);
  while (!frontier.empty()) {
    auto [d, v] = frontier.top();
    frontier.pop();
    if (done[v]) continue;
    done[v] = true;
    for (std::size_t e : inst.out_arcs(v)) {
      const Arc& a = inst.arc(e);
      const double arrive = d + a.tau + out.queue(e, d) / a.nu;
      if (arrive < dist[a.head]) {
        dist[a.head] = arrive;
        frontier.push({arrive, a.head});
      }
    }
  }
  return dist;
}

std::vector<PiecewiseLinear> compute_label_functions(const Outcome& out) {
  const Instance& inst = out.instance();
  std::vector<PiecewiseLinear> exits;
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) exits.push_back(arc_exit_function(out, e));

  std::vector<std::optional<PiecewiseLinear>> labels(inst.num_nodes());
  labels[inst.source()] = PiecewiseLinear::identity();
  for (std::size_t round = 0; round + 1 < inst.num_nodes(); ++round) {
    bool changed = false;
    for (std::size_t w = 0; w < inst.num_nodes(); ++w) {
      if (w == inst.source()) continue;
      std::optional<PiecewiseLinear> best;
      for (std::size_t e : inst.in_arcs(w)) {
        const auto& from = labels[inst.arc(e).tail];
        if (!from) continue;
        auto candidate = compose(exits[e], *from);
        best = best ? pointwise_min(*best, candidate) : std::move(candidate);
      }
      if (best && (!labels[w] || !(*labels[w] == *best))) {
        labels[w] = std::move(best);
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<PiecewiseLinear> result;
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (!labels[v]) {
      throw LoadError("node " + inst.node_name(v) + " unreachable from source");
    }
    result.push_back(std::move(*labels[v]));
  }
  return result;
}

}  // namespace fot
