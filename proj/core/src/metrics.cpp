#include <algorithm>
#include <cmath>
#include <limits>

#include "fot/loading.h"

namespace fot {

namespace {

// Largest d_v(a) - l_v(theta(a)) over the agents of class c leaving the
// i-th path node, with entry times inside the window.
double class_gap(const Outcome& out, std::size_t c, std::size_t i,
                 const PiecewiseLinear& label, const MeasureWindow& window) {
  const StrategyClass& cls = out.profile()[c];
  double worst = -std::numeric_limits<double>::infinity();
  if (cls.is_atom()) {
    const double theta = cls.entry_begin();
    if (theta < window.entry_min || theta > window.entry_max) return worst;
    const double ref = label(theta);
    for (const auto& p : out.departures(c, i)) {
      worst = std::max({worst, p.d0 - ref, p.at(p.s1) - ref});
    }
    return worst;
  }
  const auto bps = label.breakpoints();
  for (const auto& p : out.departures(c, i)) {
    const double lo = std::max(p.s0, window.entry_min);
    const double hi = std::min(p.s1, window.entry_max);
    if (!(hi > lo)) continue;
    worst = std::max(worst, p.at(lo) - label(lo));
    worst = std::max(worst, p.at(hi) - label.left_limit(hi));
    auto it = std::upper_bound(bps.begin(), bps.end(), lo);
    for (; it != bps.end() && *it < hi; ++it) {
      worst = std::max(worst, p.at(*it) - label.left_limit(*it));
    }
  }
  return worst;
}

double sup_gap(const Instance& inst, const Outcome& out, const MeasureWindow& window,
               bool sink_only) {
  const auto& labels = out.label_functions();
  double worst = 0.0;
  for (std::size_t c = 0; c < out.profile().size(); ++c) {
    const auto nodes = out.profile()[c].nodes(inst);
    const std::size_t first = sink_only ? nodes.size() - 1 : 0;
    for (std::size_t i = first; i < nodes.size(); ++i) {
      worst = std::max(worst, class_gap(out, c, i, labels[nodes[i]], window));
    }
  }
  return worst;
}

}  // namespace

double measure_epsilon(const Instance& inst, const Outcome& out,
                       const MeasureWindow& window) {
  return sup_gap(inst, out, window, true);
}

double measure_strict_delta(const Instance& inst, const Outcome& out,
                            const MeasureWindow& window) {
  return sup_gap(inst, out, window, false);
}

double measure_overtaking(const Instance& inst, const Outcome& out, std::size_t c,
                          std::size_t v) {
  const StrategyClass& cls = out.profile().at(c);
  const auto nodes = cls.nodes(inst);
  const auto pos = std::find(nodes.begin(), nodes.end(), v);
  if (pos == nodes.end()) {
    throw LoadError("node " + inst.node_name(v) + " is not on the path of class " +
                    std::to_string(c));
  }
  const std::size_t i = static_cast<std::size_t>(pos - nodes.begin());
  const double theta_a = cls.entry_begin();
  const double first_sigma = cls.is_atom() ? 0.0 : theta_a;
  const double d = out.departure(c, i, first_sigma);
  const double theta_star =
      std::min(out.label_functions()[v].lower_inverse(d), out.horizon());

  double mass = 0.0;
  for (const auto& other : out.profile()) {
    if (other.is_atom()) {
      const double t = other.entry_begin();
      if (t > theta_a && t < theta_star) mass += other.mass();
    } else {
      const auto& iv = std::get<EntryInterval>(other.entry);
      const double lo = std::max(iv.start, theta_a);
      const double hi = std::min(iv.end, theta_star);
      if (hi > lo) mass += iv.rate * (hi - lo);
    }
  }
  return mass;
}

FlowResidualReport thin_flow_residuals(const Instance& inst, const Outcome& out,
                                       double theta_a, double theta_b,
                                       const GeneralizedSubnetwork& sub,
                                       const ThinFlow& reference) {
  const auto& labels = out.label_functions();
  const double dtheta = theta_b - theta_a;
  LabelVector dl(inst.num_nodes());
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    dl[v] = labels[v](theta_b) - labels[v](theta_a);
  }
  std::vector<double> dx(inst.num_arcs());
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
    const auto& f = out.inflow(e);
    const auto& lv = labels[inst.arc(e).tail];
    dx[e] = f(lv(theta_b)) - f(lv(theta_a));
  }

  FlowResidualReport r;
  std::vector<double> net(inst.num_nodes(), 0.0);
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
    const Arc& a = inst.arc(e);
    net[a.head] += dx[e];
    net[a.tail] -= dx[e];
    if (!sub.allowed.contains(e)) {
      r.outside_flow = std::max(r.outside_flow, dx[e]);
      continue;
    }
    const double excess = dx[e] - a.nu * dl[a.head];
    r.upper_bound = std::max(r.upper_bound, excess);
    if (sub.forced_queue.contains(e)) {
      r.forced_equality = std::max(r.forced_equality, std::abs(excess));
    }
  }
  const double value = inst.inflow_rate() * dtheta;
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    double dev = net[v];
    if (v == inst.source()) dev += value;
    if (v == inst.sink()) dev -= value;
    r.node_imbalance = std::max(r.node_imbalance, std::abs(dev));
    r.direction_gap =
        std::max(r.direction_gap, std::abs(dl[v] / dtheta - reference.lambda[v]));
  }
  return r;
}

LipschitzConstants approximate_lipschitz_constants(const Instance& inst) {
  LipschitzConstants c;
  c.k = inst.kappa() * static_cast<double>(inst.num_nodes());
  c.j = 3.0 * c.k * inst.capacity_sum();
  return c;
}

double approximate_lipschitz_excess(const Instance& inst, const Outcome& out,
                                    const std::vector<double>& grid, double epsilon) {
  const auto constants = approximate_lipschitz_constants(inst);
  const auto& labels = out.label_functions();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    std::vector<double> values;
    for (double x : grid) values.push_back(labels[v](x));
    for (std::size_t a = 0; a < grid.size(); ++a) {
      for (std::size_t b = a + 1; b < grid.size(); ++b) {
        if (!(grid[b] > grid[a])) continue;
        worst = std::max(worst, values[b] - values[a] - constants.k * (grid[b] - grid[a]) -
                                    constants.j * epsilon);
      }
    }
  }
  return worst;
}

}  // namespace fot
