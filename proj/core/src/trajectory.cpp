#include "fot/trajectory.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace fot {

Trajectory::Trajectory(Instance inst, GeneralizedSubnetwork sub,
                       std::vector<Phase> phases, double horizon,
                       std::size_t degenerate_steps)
    : inst_(std::move(inst)),
      sub_(std::move(sub)),
      phases_(std::move(phases)),
      horizon_(horizon),
      degenerate_steps_(degenerate_steps) {}

double default_horizon(const Instance& inst) {
  return 4.0 * inst.total_transit_time() * inst.kappa();
}

namespace {

// Configuration just after leaving l in direction lambda: arcs on their
// hyperplane are classified by the sign of the slack rate.
Configuration interior_configuration(const Instance& inst, const LabelVector& l,
                                     const LabelVector& lambda,
                                     const GeneralizedSubnetwork& sub,
                                     double eta) {
  Configuration cfg{ArcSet(inst.num_arcs()), ArcSet(inst.num_arcs())};
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
    if (sub.forced_queue.contains(e)) {
      cfg.active.insert(e);
      cfg.resetting.insert(e);
      continue;
    }
    if (!sub.allowed.contains(e)) continue;
    const double g = arc_slack(inst, l, e);
    const Arc& a = inst.arc(e);
    const double r = lambda[a.head] - lambda[a.tail];
    if (g > eta || (g >= -eta && r > eta)) {
      cfg.active.insert(e);
      cfg.resetting.insert(e);
    } else if (g >= -eta && r >= -eta) {
      cfg.active.insert(e);
    }
  }
  return cfg;
}

std::size_t default_phase_cap(const Instance& inst) {
  const std::size_t m = inst.num_arcs();
  if (m >= 20) return 10'000'000;
  return std::min<std::size_t>(10'000'000, 10 * (std::size_t{1} << m));
}

}  // namespace

Trajectory compute_trajectory(const Instance& inst,
                              const GeneralizedSubnetwork& sub,
                              const LabelVector& start,
                              const TrajectoryOptions& opts) {
  const double eta = opts.tol.eta;
  const double horizon = opts.horizon.value_or(default_horizon(inst));
  if (!(horizon > 0.0)) throw TrajectoryError("horizon must be positive");
  if (start.size() != inst.num_nodes()) {
    throw TrajectoryError("start label has wrong dimension");
  }
  const std::size_t cap = opts.phase_cap.value_or(default_phase_cap(inst));

  std::vector<Phase> phases;
  LabelVector l = start;
  double theta = 0.0;
  std::size_t consecutive_degenerate = 0;
  std::size_t degenerate_total = 0;
  bool joint = false;
  ThinFlowOptions tf_opts = opts.thin_flow;
  tf_opts.tol = opts.tol;

  while (theta < horizon) {
    if (phases.size() >= cap) {
      throw TrajectoryError("phase cap of " + std::to_string(cap) + " exceeded");
    }
    const Configuration point_cfg = classify_configuration(inst, l, sub, opts.tol);
    const auto validity = is_valid_configuration(inst, point_cfg);
    if (!validity) {
      std::ostringstream msg;
      msg << "invalid configuration at theta=" << theta << ": "
          << validity.witnesses.front();
      throw TrajectoryError(msg.str());
    }
    ThinFlow flow;
    try {
      flow = solve_thin_flow(inst, point_cfg, tf_opts);
    } catch (const ThinFlowError& err) {
      std::ostringstream msg;
      msg << "thin flow failed at theta=" << theta << ": " << err.what();
      throw TrajectoryError(msg.str());
    }
    const LabelVector& lambda = flow.lambda;

    double rate_scale = 1.0;
    double t_event = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, std::size_t>> hits;
    for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
      if (!sub.allowed.contains(e) || sub.forced_queue.contains(e)) continue;
      const Arc& a = inst.arc(e);
      const double g = arc_slack(inst, l, e);
      const double r = lambda[a.head] - lambda[a.tail];
      rate_scale = std::max(rate_scale, std::abs(r));
      double t = std::numeric_limits<double>::infinity();
      if (g > eta && r < -eta) {
        t = g / -r;
      } else if (g < -eta && r > eta) {
        t = -g / r;
      }
      if (std::isfinite(t)) {
        hits.emplace_back(t, e);
        t_event = std::min(t_event, t);
      }
    }
    std::size_t simultaneous = 0;
    for (const auto& [t, e] : hits) {
      if (t <= t_event + eta / rate_scale) ++simultaneous;
    }

    Phase phase;
    phase.theta_start = theta;
    phase.label_start = l;
    phase.direction = lambda;
    phase.config = interior_configuration(inst, l, lambda, sub, eta);
    phase.flow = flow;
    phase.joint_reclassification = joint;
    if (std::isinf(t_event)) {
      phases.push_back(std::move(phase));
      break;
    }
    const double end = theta + t_event;
    if (end >= horizon) {
      phase.theta_end = horizon;
      phases.push_back(std::move(phase));
      break;
    }
    phase.theta_end = end;
    phases.push_back(std::move(phase));

    if (t_event < eta) {
      ++degenerate_total;
      if (++consecutive_degenerate > inst.num_arcs()) {
        throw TrajectoryError("too many consecutive degenerate phases at theta=" +
                              std::to_string(theta));
      }
    } else {
      consecutive_degenerate = 0;
    }
    l = l.advanced(lambda, t_event);
    theta = end;
    joint = simultaneous > 1;
    tf_opts.warm_start = lambda;
  }
  return Trajectory(inst, sub, std::move(phases), horizon, degenerate_total);
}

LabelVector evaluate_trajectory(const Trajectory& traj, double theta) {
  const auto& phases = traj.phases();
  if (phases.empty() || theta < phases.front().theta_start) {
    throw TrajectoryError("theta before trajectory start");
  }
  if (theta > traj.end()) {
    std::ostringstream msg;
    msg << "theta=" << theta << " beyond computed horizon " << traj.end();
    throw TrajectoryError(msg.str());
  }
  auto it = std::upper_bound(
      phases.begin(), phases.end(), theta,
      [](double t, const Phase& p) { return t < p.theta_start; });
  return std::prev(it)->at(theta);
}

SteadyStateInfo steady_state_info(const Trajectory& traj) {
  SteadyStateInfo info;
  const Phase& last = traj.phases().back();
  if (!last.infinite()) return info;
  info.reached = true;
  info.t_ss = last.theta_start;
  info.lambda_ss = last.direction;
  const Instance& inst = traj.instance();
  const double eta = Tolerance{}.eta;
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
    if (!traj.subnetwork().allowed.contains(e)) continue;
    const Arc& a = inst.arc(e);
    const double r = last.direction[a.head] - last.direction[a.tail];
    if (r > eta && !last.config.active.contains(e)) {
      info.violations.push_back(a.id + " has increasing slack but is inactive");
    }
    if (r < -eta && last.config.resetting.contains(e)) {
      info.violations.push_back(a.id + " has decreasing slack but a queue");
    }
  }
  return info;
}

namespace {

// Paths with their flow; paths are chosen greedily following the smallest
// arc id with remaining flow, cycles are cancelled on the way.
std::vector<std::pair<std::vector<std::size_t>, double>> decompose(
    const Instance& inst, std::vector<double> x, double eta) {
  const double thr = 1e-14 * std::max(1.0, inst.inflow_rate());
  std::vector<std::vector<std::size_t>> out(inst.num_nodes());
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    for (std::size_t e : inst.out_arcs(v)) out[v].push_back(e);
    std::sort(out[v].begin(), out[v].end(), [&](std::size_t a, std::size_t b) {
      return inst.arc(a).id < inst.arc(b).id;
    });
  }
  std::map<std::vector<std::size_t>, double> paths;
  const std::size_t guard = 4 * (inst.num_arcs() + 1) * (inst.num_arcs() + 1) + 16;
  for (std::size_t round = 0; round < guard; ++round) {
    std::vector<std::size_t> walk;
    std::vector<std::size_t> pos(inst.num_nodes(), std::numeric_limits<std::size_t>::max());
    std::size_t v = inst.source();
    pos[v] = 0;
    bool progressed = false;
    while (v != inst.sink()) {
      std::size_t next = inst.num_arcs();
      for (std::size_t e : out[v]) {
        if (x[e] > thr) {
          next = e;
          break;
        }
      }
      if (next == inst.num_arcs()) break;
      walk.push_back(next);
      v = inst.arc(next).head;
      if (pos[v] != std::numeric_limits<std::size_t>::max()) {
        // Cancel the cycle that closes at v.
        const std::size_t from = pos[v];
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = from; i < walk.size(); ++i) m = std::min(m, x[walk[i]]);
        for (std::size_t i = from; i < walk.size(); ++i) x[walk[i]] -= m;
        progressed = true;
        break;
      }
      pos[v] = walk.size();
    }
    if (progressed) continue;
    if (v != inst.sink() || walk.empty()) break;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t e : walk) m = std::min(m, x[e]);
    for (std::size_t e : walk) x[e] -= m;
    paths[walk] += m;
  }
  double residual = 0.0;
  for (double r : x) residual = std::max(residual, std::abs(r));
  if (residual > eta) {
    throw TrajectoryError("path decomposition residual " + std::to_string(residual));
  }
  std::vector<std::pair<std::vector<std::size_t>, double>> result;
  for (auto& [p, f] : paths) {
    if (f > thr) result.emplace_back(p, f);
  }
  std::sort(result.begin(), result.end(), [&](const auto& a, const auto& b) {
    return std::lexicographical_compare(
        a.first.begin(), a.first.end(), b.first.begin(), b.first.end(),
        [&](std::size_t x1, std::size_t x2) { return inst.arc(x1).id < inst.arc(x2).id; });
  });
  return result;
}

}  // namespace

StrategyProfile derive_exact_profile(const Trajectory& traj,
                                     std::optional<double> horizon) {
  const double until = horizon.value_or(traj.horizon());
  const Instance& inst = traj.instance();
  StrategyProfile profile;
  std::size_t index = 0;
  for (const Phase& phase : traj.phases()) {
    ++index;
    const double a = phase.theta_start;
    const double b = std::min(phase.theta_end, until);
    if (!(b > a)) continue;
    for (auto& [path, rate] : decompose(inst, phase.flow.x, Tolerance{}.eta)) {
      StrategyClass c;
      c.path = path;
      c.entry = EntryInterval{a, b, rate};
      c.waiting.assign(path.size() + 1, AffineWait{});
      std::string name = "phase" + std::to_string(index) + ":";
      for (std::size_t i = 0; i < path.size(); ++i) {
        name += (i ? "," : "") + inst.arc(path[i]).id;
      }
      c.label = std::move(name);
      profile.push_back(std::move(c));
    }
  }
  return profile;
}

LabelVector project_to_valid(const Instance& inst, const LabelVector& l,
                             const Tolerance& tol) {
  const auto sub = GeneralizedSubnetwork::full(inst);
  LabelVector cur = l;
  const std::size_t cap = std::max<std::size_t>(1, inst.num_nodes() * inst.num_arcs());
  for (std::size_t step = 0;; ++step) {
    const Configuration cfg = classify_configuration(inst, cur, sub, tol);
    std::vector<bool> to_t(inst.num_nodes(), false);
    {
      std::deque<std::size_t> queue{inst.sink()};
      to_t[inst.sink()] = true;
      while (!queue.empty()) {
        const std::size_t w = queue.front();
        queue.pop_front();
        for (std::size_t e : inst.in_arcs(w)) {
          const std::size_t v = inst.arc(e).tail;
          if (cfg.active.contains(e) && !to_t[v]) {
            to_t[v] = true;
            queue.push_back(v);
          }
        }
      }
    }
    std::vector<bool> in_t(inst.num_nodes(), false);
    std::deque<std::size_t> queue;
    for (std::size_t e : cfg.resetting.indices()) {
      const std::size_t w = inst.arc(e).head;
      if (!to_t[w] && !in_t[w]) {
        in_t[w] = true;
        queue.push_back(w);
      }
    }
    if (queue.empty()) break;
    if (step >= cap) {
      throw TrajectoryError("projection did not terminate within " +
                            std::to_string(cap) + " steps");
    }
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t e : inst.out_arcs(v)) {
        const std::size_t w = inst.arc(e).head;
        if (cfg.active.contains(e) && !in_t[w]) {
          in_t[w] = true;
          queue.push_back(w);
        }
      }
    }
    double shift = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
      const Arc& a = inst.arc(e);
      const double g = arc_slack(inst, cur, e);
      if (in_t[a.tail] && !in_t[a.head]) {
        shift = std::min(shift, -g);  // leaving arc turns active at slack 0
      } else if (!in_t[a.tail] && in_t[a.head] && cfg.resetting.contains(e)) {
        shift = std::min(shift, g);  // entering queue empties at slack 0
      }
    }
    if (!std::isfinite(shift) || shift <= 0.0) {
      throw TrajectoryError("projection step is not positive");
    }
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      if (in_t[v]) cur[v] -= shift;
    }
  }
  const auto report = is_valid_configuration(
      inst, classify_configuration(inst, cur, sub, tol));
  if (!report) {
    throw TrajectoryError("projection produced an invalid label: " +
                          report.witnesses.front());
  }
  return cur;
}

}  // namespace fot
