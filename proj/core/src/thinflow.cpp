#include "fot/thinflow.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "maxflow.h"

namespace fot {

ArcSet ArcSet::all(std::size_t num_arcs) {
  ArcSet s(num_arcs);
  s.bits_.assign(num_arcs, true);
  return s;
}

ArcSet ArcSet::of(const Instance& inst, const std::vector<std::string>& ids) {
  ArcSet s(inst.num_arcs());
  for (const auto& id : ids) s.insert(inst.arc_index(id));
  return s;
}

std::size_t ArcSet::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::vector<std::size_t> ArcSet::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < bits_.size(); ++e) {
    if (bits_[e]) out.push_back(e);
  }
  return out;
}

std::vector<std::string> ArcSet::ids(const Instance& inst) const {
  std::vector<std::string> out;
  for (std::size_t e : indices()) out.push_back(inst.arc(e).id);
  return out;
}

bool ArcSet::subset_of(const ArcSet& other) const {
  for (std::size_t e = 0; e < bits_.size(); ++e) {
    if (bits_[e] && !other.bits_[e]) return false;
  }
  return true;
}

GeneralizedSubnetwork GeneralizedSubnetwork::full(const Instance& inst) {
  return {ArcSet::all(inst.num_arcs()), ArcSet(inst.num_arcs())};
}

Configuration classify_configuration(const Instance& inst, const LabelVector& l,
                                     const GeneralizedSubnetwork& sub,
                                     const Tolerance& tol) {
  Configuration cfg{ArcSet(inst.num_arcs()), ArcSet(inst.num_arcs())};
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
    if (sub.forced_queue.contains(e)) {
      cfg.active.insert(e);
      cfg.resetting.insert(e);
      continue;
    }
    if (!sub.allowed.contains(e)) continue;
    const double slack = arc_slack(inst, l, e);
    if (slack >= -tol.eta) cfg.active.insert(e);
    if (slack > tol.eta) cfg.resetting.insert(e);
  }
  return cfg;
}

namespace {

std::vector<bool> reach(const Instance& inst, const ArcSet& arcs,
                        std::size_t start, bool forward) {
  std::vector<bool> seen(inst.num_nodes(), false);
  std::deque<std::size_t> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t e : forward ? inst.out_arcs(v) : inst.in_arcs(v)) {
      if (!arcs.contains(e)) continue;
      const std::size_t w = forward ? inst.arc(e).head : inst.arc(e).tail;
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

ValidityReport is_valid_configuration(const Instance& inst,
                                      const Configuration& cfg) {
  ValidityReport report;
  auto fail = [&](std::string msg) {
    report.valid = false;
    report.witnesses.push_back(std::move(msg));
  };
  for (std::size_t e : cfg.resetting.indices()) {
    if (!cfg.active.contains(e)) {
      fail("resetting arc " + inst.arc(e).id + " is not active");
    }
  }
  const auto from_s = reach(inst, cfg.active, inst.source(), true);
  const auto to_t = reach(inst, cfg.active, inst.sink(), false);
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (!from_s[v]) fail(inst.node_name(v) + " unreachable from s over active arcs");
  }
  for (std::size_t e : cfg.resetting.indices()) {
    const Arc& a = inst.arc(e);
    if (!from_s[a.tail] || !to_t[a.head]) {
      fail("resetting arc " + a.id + " is on no active s-t path");
    }
  }
  for (std::size_t e : cfg.resetting.indices()) {
    const Arc& a = inst.arc(e);
    if (reach(inst, cfg.active, a.head, true)[a.tail]) {
      fail("resetting arc " + a.id + " lies on an active cycle");
    }
  }
  return report;
}

double ThinFlowResiduals::max_residual() const {
  return std::max({conservation, flow_value, source_label, min_condition,
                   flow_carrying, support});
}

bool ThinFlowResiduals::passes(double eta) const {
  return max_residual() <= eta && min_lambda > 0.0;
}

ThinFlowResiduals check_thin_flow(const Instance& inst,
                                  const Configuration& cfg, const ThinFlow& tf) {
  ThinFlowResiduals r;
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = inst.num_nodes();
  const double u0 = inst.inflow_rate();

  std::vector<double> net_in(n, 0.0);
  for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
    const Arc& a = inst.arc(e);
    net_in[a.head] += tf.x[e];
    net_in[a.tail] -= tf.x[e];
    if (tf.x[e] < 0.0) r.support = std::max(r.support, -tf.x[e]);
    if (!cfg.active.contains(e)) r.support = std::max(r.support, std::abs(tf.x[e]));
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (v == inst.source() || v == inst.sink()) continue;
    r.conservation = std::max(r.conservation, std::abs(net_in[v]));
  }
  r.flow_value = std::max(std::abs(-net_in[inst.source()] - u0),
                          std::abs(net_in[inst.sink()] - u0));
  r.source_label = std::abs(tf.lambda[inst.source()] - 1.0);

  auto rho = [&](std::size_t e) {
    const Arc& a = inst.arc(e);
    const double q = tf.x[e] / a.nu;
    return cfg.resetting.contains(e) ? q : std::max(tf.lambda[a.tail], q);
  };
  for (std::size_t w = 0; w < n; ++w) {
    if (w == inst.source()) continue;
    double m = inf;
    for (std::size_t e : inst.in_arcs(w)) {
      if (cfg.active.contains(e)) m = std::min(m, rho(e));
    }
    r.min_condition = std::max(r.min_condition, std::abs(tf.lambda[w] - m));
  }
  for (std::size_t e : cfg.active.indices()) {
    if (tf.x[e] > Tolerance{}.eta) {
      r.flow_carrying = std::max(
          r.flow_carrying, std::abs(tf.lambda[inst.arc(e).head] - rho(e)));
    }
  }
  r.min_lambda = inf;
  for (std::size_t v = 0; v < n; ++v) r.min_lambda = std::min(r.min_lambda, tf.lambda[v]);
  return r;
}

namespace {

enum class Sign { lt, eq, gt };

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

class PatternSolver {
 public:
  PatternSolver(const Instance& inst, const Configuration& cfg)
      : inst_(inst), cfg_(cfg), n_(inst.num_nodes()) {
    for (std::size_t e : cfg.active.indices()) {
      if (!cfg.resetting.contains(e)) free_.push_back(e);
    }
  }

  std::optional<ThinFlow> run(const LabelVector& start, std::size_t cap,
                              double eta, std::size_t& iterations) {
    sign_.assign(inst_.num_arcs(), Sign::eq);
    for (std::size_t e : free_) sign_[e] = sign_of(start, e);

    estimate_ = start;
    std::set<std::vector<Sign>> seen;
    for (iterations = 0; iterations < cap; ++iterations) {
      if (!seen.insert(sign_).second) return std::nullopt;
      build_classes();
      if (feed_starved_classes()) continue;
      auto lambda = solve_labels();
      if (!lambda) return std::nullopt;
      estimate_ = *lambda;
      if (flip_signs(*lambda)) continue;
      for (std::size_t v = 0; v < n_; ++v) {
        if (!((*lambda)[v] > 0.0)) return std::nullopt;
      }
      if (repair_min_condition(*lambda)) continue;
      std::vector<double> x;
      switch (route(*lambda, x)) {
        case Route::ok: {
          ThinFlow tf{std::move(x), std::move(*lambda)};
          if (check_thin_flow(inst_, cfg_, tf).passes(eta)) return tf;
          return std::nullopt;
        }
        case Route::split:
          continue;
        case Route::stuck:
          return std::nullopt;
      }
    }
    return std::nullopt;
  }

 private:
  enum class Route { ok, split, stuck };
  static constexpr double kTie = 1e-12;

  Sign sign_of(const LabelVector& l, std::size_t e) const {
    const Arc& a = inst_.arc(e);
    const double d = l[a.head] - l[a.tail];
    if (d > kTie) return Sign::gt;
    if (d < -kTie) return Sign::lt;
    return Sign::eq;
  }

  bool forced(std::size_t e) const {
    return cfg_.resetting.contains(e) ||
           (cfg_.active.contains(e) && sign_[e] == Sign::gt);
  }

  void build_classes() {
    UnionFind uf(n_);
    for (std::size_t e : free_) {
      if (sign_[e] == Sign::eq) uf.unite(inst_.arc(e).tail, inst_.arc(e).head);
    }
    class_of_.assign(n_, 0);
    std::vector<std::size_t> root_index(n_, n_);
    num_classes_ = 0;
    for (std::size_t v = 0; v < n_; ++v) {
      const std::size_t r = uf.find(v);
      if (root_index[r] == n_) root_index[r] = num_classes_++;
      class_of_[v] = root_index[r];
    }
  }

  // A class other than the source class without forced inflow cannot
  // balance; tie its cheapest entering free arc.
  bool feed_starved_classes() {
    const std::size_t cs = class_of_[inst_.source()];
    std::vector<bool> fed(num_classes_, false);
    std::vector<std::size_t> cheapest(num_classes_, inst_.num_arcs());
    for (std::size_t e : cfg_.active.indices()) {
      const Arc& a = inst_.arc(e);
      const std::size_t cv = class_of_[a.tail];
      const std::size_t cw = class_of_[a.head];
      if (cv == cw) continue;
      if (forced(e)) {
        fed[cw] = true;
      } else if (cheapest[cw] == inst_.num_arcs() ||
                 estimate_[a.tail] < estimate_[inst_.arc(cheapest[cw]).tail]) {
        cheapest[cw] = e;
      }
    }
    bool changed = false;
    for (std::size_t c = 0; c < num_classes_; ++c) {
      if (c == cs || fed[c] || cheapest[c] == inst_.num_arcs()) continue;
      sign_[cheapest[c]] = Sign::eq;
      changed = true;
    }
    return changed;
  }

  // Class balance: for every class C other than the source class,
  // (forced inflow into C) - (forced outflow of C) = u0 [t in C],
  // with forced arcs carrying nu_e * lambda_head.
  std::optional<LabelVector> solve_labels() const {
    const std::size_t cs = class_of_[inst_.source()];
    std::vector<std::size_t> row(num_classes_, num_classes_);
    std::size_t k = 0;
    for (std::size_t c = 0; c < num_classes_; ++c) {
      if (c != cs) row[c] = k++;
    }
    std::vector<double> values(num_classes_, 1.0);
    if (k > 0) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
      for (std::size_t e : cfg_.active.indices()) {
        if (!forced(e)) continue;
        const Arc& a = inst_.arc(e);
        const std::size_t cv = class_of_[a.tail];
        const std::size_t cw = class_of_[a.head];
        if (cv == cw) continue;
        if (cw != cs) m(row[cw], row[cw]) += a.nu;
        if (cv != cs) {
          if (cw != cs) {
            m(row[cv], row[cw]) -= a.nu;
          } else {
            b(row[cv]) += a.nu;
          }
        }
      }
      const std::size_t ct = class_of_[inst_.sink()];
      if (ct != cs) b(row[ct]) += inst_.inflow_rate();

      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      lu.setThreshold(1e-12);
      if (!lu.isInvertible()) return std::nullopt;
      Eigen::VectorXd sol = lu.solve(b);
      for (std::size_t c = 0; c < num_classes_; ++c) {
        if (c == cs) continue;
        values[c] = sol(row[c]);
        if (!std::isfinite(values[c])) return std::nullopt;
      }
    }
    LabelVector lambda(n_);
    for (std::size_t v = 0; v < n_; ++v) lambda[v] = values[class_of_[v]];
    return lambda;
  }

  bool flip_signs(const LabelVector& lambda) {
    bool changed = false;
    for (std::size_t e : free_) {
      const Sign now = sign_of(lambda, e);
      // A prediction contradicted by the solve moves to the tie first.
      if ((sign_[e] == Sign::gt && now == Sign::lt) ||
          (sign_[e] == Sign::lt && now == Sign::gt)) {
        sign_[e] = Sign::eq;
        changed = true;
      }
    }
    return changed;
  }

  // Every node other than s needs an active in-arc attaining its label:
  // a resetting arc, or a free arc whose tail label is not larger.
  bool repair_min_condition(const LabelVector& lambda) {
    bool changed = false;
    for (std::size_t w = 0; w < n_; ++w) {
      if (w == inst_.source()) continue;
      bool ok = false;
      std::size_t best = inst_.num_arcs();
      for (std::size_t e : inst_.in_arcs(w)) {
        if (!cfg_.active.contains(e)) continue;
        if (cfg_.resetting.contains(e) || sign_[e] != Sign::lt ||
            sign_of(lambda, e) == Sign::eq) {
          ok = true;
          break;
        }
        if (best == inst_.num_arcs() ||
            lambda[inst_.arc(e).tail] < lambda[inst_.arc(best).tail]) {
          best = e;
        }
      }
      if (!ok && best != inst_.num_arcs()) {
        sign_[best] = Sign::eq;
        changed = true;
      }
    }
    return changed;
  }

  // Route the flow that forced arcs leave unbalanced over the equal-label
  // arcs, each carrying at most nu_e * lambda_w. On failure, the minimum
  // cut separates a low-label part S from the rest of its class.
  Route route(const LabelVector& lambda, std::vector<double>& x) {
    const double u0 = inst_.inflow_rate();
    x.assign(inst_.num_arcs(), 0.0);
    std::vector<double> demand(n_, 0.0);
    demand[inst_.sink()] += u0;
    demand[inst_.source()] -= u0;
    for (std::size_t e : cfg_.active.indices()) {
      if (!forced(e)) continue;
      const Arc& a = inst_.arc(e);
      x[e] = a.nu * lambda[a.head];
      demand[a.head] -= x[e];
      demand[a.tail] += x[e];
    }
    const std::size_t src = n_;
    const std::size_t snk = n_ + 1;
    std::vector<detail::FlowEdge> edges;
    std::vector<std::size_t> eq_arcs;
    for (std::size_t e : free_) {
      if (sign_[e] != Sign::eq) continue;
      const Arc& a = inst_.arc(e);
      edges.push_back({a.tail, a.head, a.nu * lambda[a.head]});
      eq_arcs.push_back(e);
    }
    double supply = 0.0;
    for (std::size_t v = 0; v < n_; ++v) {
      if (demand[v] < 0.0) {
        edges.push_back({src, v, -demand[v]});
        supply -= demand[v];
      } else if (demand[v] > 0.0) {
        edges.push_back({v, snk, demand[v]});
      }
    }
    const double tol = 1e-12 * std::max(1.0, supply);
    const auto mf = detail::max_flow(n_ + 2, edges, src, snk, tol);
    if (mf.value >= supply - tol) {
      for (std::size_t i = 0; i < eq_arcs.size(); ++i) x[eq_arcs[i]] = mf.flow[i];
      return Route::ok;
    }
    bool changed = false;
    for (std::size_t e : eq_arcs) {
      const Arc& a = inst_.arc(e);
      const bool sv = mf.source_side[a.tail];
      const bool sw = mf.source_side[a.head];
      if (sv && !sw) {
        sign_[e] = Sign::gt;
        changed = true;
      } else if (!sv && sw) {
        sign_[e] = Sign::lt;
        changed = true;
      }
    }
    return changed ? Route::split : Route::stuck;
  }

  const Instance& inst_;
  const Configuration& cfg_;
  std::size_t n_;
  std::vector<std::size_t> free_;
  std::vector<Sign> sign_;
  LabelVector estimate_;
  std::vector<std::size_t> class_of_;
  std::size_t num_classes_ = 0;
};

}  // namespace

ThinFlow solve_thin_flow(const Instance& inst, const Configuration& cfg,
                         const ThinFlowOptions& opts, ThinFlowStats* stats) {
  const auto validity = is_valid_configuration(inst, cfg);
  if (!validity) {
    throw ThinFlowError("invalid configuration: " + validity.witnesses.front());
  }
  LabelVector start(inst.num_nodes(), inst.kappa());
  if (opts.warm_start && opts.warm_start->size() == inst.num_nodes()) {
    start = *opts.warm_start;
  }
  start[inst.source()] = 1.0;

  PatternSolver solver(inst, cfg);
  std::size_t iterations = 0;
  auto result = solver.run(start, 10 * inst.num_nodes(), opts.tol.eta, iterations);
  if (!result && opts.warm_start) {
    // A stale warm start can lead the iteration astray; retry from kappa.
    LabelVector fresh(inst.num_nodes(), inst.kappa());
    fresh[inst.source()] = 1.0;
    std::size_t more = 0;
    result = solver.run(fresh, 10 * inst.num_nodes(), opts.tol.eta, more);
    iterations += more;
  }
  if (stats) {
    stats->iterations = iterations;
    stats->used_oracle = !result.has_value();
  }
  if (result) return *result;
  if (!opts.allow_oracle_fallback) {
    throw ThinFlowError("thin-flow iteration did not converge after " +
                        std::to_string(iterations) + " iterations");
  }
  return thin_flow_oracle(inst, cfg, opts);
}

}  // namespace fot
