#include <functional>
#include <numeric>

#include "fot/thinflow.h"
#include "simplex.h"

namespace fot {

namespace {

// Each active non-resetting arc e = vw is put in one of three cases:
//   off:   x_e = 0 and lambda_w <= lambda_v
//   tied:  lambda_w = lambda_v and x_e <= nu_e lambda_w
//   full:  x_e = nu_e lambda_w and lambda_w >= lambda_v
// Only case assignments whose strict orderings are simultaneously
// realisable are expanded.
enum class Case { off, tied, full };

bool realisable(const Instance& inst, const std::vector<std::size_t>& arcs,
                const std::vector<Case>& cases, std::size_t assigned) {
  const std::size_t n = inst.num_nodes();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    return parent[v] == v ? v : parent[v] = find(parent[v]);
  };
  for (std::size_t i = 0; i < assigned; ++i) {
    if (cases[i] == Case::tied) {
      parent[find(inst.arc(arcs[i]).tail)] = find(inst.arc(arcs[i]).head);
    }
  }
  // Strict "lower -> higher" edges between classes must be acyclic.
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indeg(n, 0);
  for (std::size_t i = 0; i < assigned; ++i) {
    if (cases[i] == Case::tied) continue;
    std::size_t lo = find(inst.arc(arcs[i]).tail);
    std::size_t hi = find(inst.arc(arcs[i]).head);
    if (cases[i] == Case::off) std::swap(lo, hi);
    if (lo == hi) return false;
    succ[lo].push_back(hi);
    ++indeg[hi];
  }
  std::vector<std::size_t> stack;
  std::size_t roots = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (find(v) != v) continue;
    ++roots;
    if (indeg[v] == 0) stack.push_back(v);
  }
  std::size_t visited = 0;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    ++visited;
    for (std::size_t w : succ[v]) {
      if (--indeg[w] == 0) stack.push_back(w);
    }
  }
  return visited == roots;
}

}  // namespace

ThinFlow thin_flow_oracle(const Instance& inst, const Configuration& cfg,
                          const ThinFlowOptions& opts) {
  if (cfg.active.count() > opts.oracle_cap) {
    throw ThinFlowError("oracle cap exceeded: " +
                        std::to_string(cfg.active.count()) + " active arcs > " +
                        std::to_string(opts.oracle_cap));
  }
  const std::size_t n = inst.num_nodes();
  const std::size_t s = inst.source();
  const double u0 = inst.inflow_rate();

  std::vector<std::size_t> free_arcs;
  for (std::size_t e : cfg.active.indices()) {
    if (!cfg.resetting.contains(e)) free_arcs.push_back(e);
  }
  const auto active = cfg.active.indices();

  // Variable layout: labels of nodes other than s, then x of active arcs.
  std::vector<std::size_t> lam_var(n, n);
  std::size_t nv = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (v != s) lam_var[v] = nv++;
  }
  std::vector<std::size_t> x_var(inst.num_arcs(), 0);
  for (std::size_t e : active) x_var[e] = nv++;

  // Adds coef * lambda_v to row, folding lambda_s = 1 into the right side.
  auto add_lambda = [&](std::vector<double>& row, double& rhs, std::size_t v,
                        double coef) {
    if (v == s) {
      rhs -= coef;
    } else {
      row[lam_var[v]] += coef;
    }
  };

  auto solve_case = [&](const std::vector<Case>& cases) -> std::optional<ThinFlow> {
    detail::FeasibilityProblem lp;
    lp.num_vars = nv;
    auto eq = [&](std::vector<double> row, double rhs) {
      lp.eq.push_back(std::move(row));
      lp.eq_rhs.push_back(rhs);
    };
    auto le = [&](std::vector<double> row, double rhs) {
      lp.le.push_back(std::move(row));
      lp.le_rhs.push_back(rhs);
    };
    std::vector<Case> by_arc(inst.num_arcs(), Case::full);
    for (std::size_t i = 0; i < free_arcs.size(); ++i) by_arc[free_arcs[i]] = cases[i];

    for (std::size_t e : active) {
      const Arc& a = inst.arc(e);
      const bool resetting = cfg.resetting.contains(e);
      const Case c = by_arc[e];
      if (resetting || c == Case::full) {
        std::vector<double> row(nv, 0.0);
        double rhs = 0.0;
        row[x_var[e]] = 1.0;
        add_lambda(row, rhs, a.head, -a.nu);
        eq(std::move(row), rhs);
      }
      if (resetting) continue;
      std::vector<double> row(nv, 0.0);
      double rhs = 0.0;
      switch (c) {
        case Case::full:  // lambda_v - lambda_w <= 0
          add_lambda(row, rhs, a.tail, 1.0);
          add_lambda(row, rhs, a.head, -1.0);
          le(std::move(row), rhs);
          break;
        case Case::tied: {  // lambda_w - lambda_v = 0, x_e - nu lambda_w <= 0
          add_lambda(row, rhs, a.head, 1.0);
          add_lambda(row, rhs, a.tail, -1.0);
          eq(std::move(row), rhs);
          std::vector<double> cap(nv, 0.0);
          double cap_rhs = 0.0;
          cap[x_var[e]] = 1.0;
          add_lambda(cap, cap_rhs, a.head, -a.nu);
          le(std::move(cap), cap_rhs);
          break;
        }
        case Case::off: {  // x_e = 0, lambda_w - lambda_v <= 0
          std::vector<double> zero(nv, 0.0);
          zero[x_var[e]] = 1.0;
          eq(std::move(zero), 0.0);
          add_lambda(row, rhs, a.head, 1.0);
          add_lambda(row, rhs, a.tail, -1.0);
          le(std::move(row), rhs);
          break;
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (v == inst.sink()) continue;
      std::vector<double> row(nv, 0.0);
      for (std::size_t e : inst.out_arcs(v)) {
        if (cfg.active.contains(e)) row[x_var[e]] += 1.0;
      }
      for (std::size_t e : inst.in_arcs(v)) {
        if (cfg.active.contains(e)) row[x_var[e]] -= 1.0;
      }
      eq(std::move(row), v == s ? u0 : 0.0);
    }

    auto point = detail::find_feasible_point(lp);
    if (!point) return std::nullopt;
    ThinFlow tf{std::vector<double>(inst.num_arcs(), 0.0), LabelVector(n, 1.0)};
    for (std::size_t v = 0; v < n; ++v) {
      if (v != s) tf.lambda[v] = (*point)[lam_var[v]];
    }
    for (std::size_t e : active) tf.x[e] = (*point)[x_var[e]];
    return tf;
  };

  // Every node other than s needs an in-arc that can attain its label.
  auto min_condition_possible = [&](const std::vector<Case>& cases) {
    std::vector<bool> ok(n, false);
    ok[s] = true;
    for (std::size_t e : cfg.resetting.indices()) ok[inst.arc(e).head] = true;
    for (std::size_t i = 0; i < free_arcs.size(); ++i) {
      if (cases[i] != Case::off) ok[inst.arc(free_arcs[i]).head] = true;
    }
    for (bool b : ok) {
      if (!b) return false;
    }
    return true;
  };

  std::vector<Case> cases(free_arcs.size(), Case::off);
  std::optional<ThinFlow> found;
  std::function<void(std::size_t)> expand = [&](std::size_t i) {
    if (found) return;
    if (i == free_arcs.size()) {
      if (!min_condition_possible(cases)) return;
      auto tf = solve_case(cases);
      if (tf && check_thin_flow(inst, cfg, *tf).passes(opts.tol.eta)) {
        found = std::move(tf);
      }
      return;
    }
    for (Case c : {Case::full, Case::tied, Case::off}) {
      cases[i] = c;
      if (realisable(inst, free_arcs, cases, i + 1)) expand(i + 1);
      if (found) return;
    }
  };
  expand(0);
  if (!found) throw ThinFlowError("thin-flow oracle: no candidate passes the checker");
  return *found;
}

}  // namespace fot
