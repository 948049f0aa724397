#include "fot/packets.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

namespace fot {

void PacketInstance::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw PacketError("beta must be positive");
  if (packet_count < 1) throw PacketError("packet_count must be at least 1");
}

namespace {

void check_path(const Instance& inst, const std::vector<std::size_t>& path, std::size_t k) {
  std::vector<bool> seen(inst.num_nodes(), false);
  std::size_t at = inst.source();
  seen[at] = true;
  for (std::size_t e : path) {
    if (e >= inst.num_arcs() || inst.arc(e).tail != at || seen[inst.arc(e).head]) {
      throw PacketError("packet " + std::to_string(k) + " does not use a simple s-t path");
    }
    at = inst.arc(e).head;
    seen[at] = true;
  }
  if (at != inst.sink() || path.empty()) {
    throw PacketError("packet " + std::to_string(k) + " does not reach the sink");
  }
}

struct Event {
  double time;
  std::size_t arc;
  std::size_t packet;  // 0-based
  std::size_t hop;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.arc, a.packet) > std::tie(b.time, b.arc, b.packet);
  }
};

// Simulates packets 1..count; `skip` (0-based) is left out entirely.
PacketOutcome simulate(const PacketInstance& pinst, const PacketProfile& prof,
                       std::size_t count, std::size_t skip) {
  const Instance& inst = pinst.base;
  PacketOutcome out;
  out.packets.resize(count);
  std::vector<double> server_free(inst.num_arcs(), -std::numeric_limits<double>::infinity());
  std::priority_queue<Event, std::vector<Event>, EventLater> events;
  for (std::size_t p = 0; p < count; ++p) {
    out.packets[p].release = pinst.release(p + 1);
    if (p == skip) {
      out.packets[p].arrival = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.packets[p].hops.reserve(prof.paths[p].size());
    events.push({out.packets[p].release, prof.paths[p].front(), p, 0});
  }
  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    const Arc& a = inst.arc(ev.arc);
    PacketHop hop;
    hop.arc = ev.arc;
    hop.entry = ev.time;
    hop.proc_start = std::max(ev.time, server_free[ev.arc]);
    hop.proc_end = hop.proc_start + pinst.beta / a.nu;
    hop.tail_arrival = hop.proc_end + a.tau;
    server_free[ev.arc] = hop.proc_end;
    PacketRecord& rec = out.packets[ev.packet];
    rec.hops.push_back(hop);
    const auto& path = prof.paths[ev.packet];
    if (ev.hop + 1 < path.size()) {
      events.push({hop.tail_arrival, path[ev.hop + 1], ev.packet, ev.hop + 1});
    } else {
      rec.arrival = hop.tail_arrival;
    }
  }
  return out;
}

bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Label-setting search for packet k against the other packets' schedules.
std::vector<std::size_t> heuristic_path(const PacketInstance& pinst, const PacketProfile& prof,
                                        std::size_t count, std::size_t k) {
  const Instance& inst = pinst.base;
  const PacketOutcome others = simulate(pinst, prof, count, k - 1);
  // Per arc: (entry, packet, proc_end) of the other packets, in service order.
  std::vector<std::vector<std::tuple<double, std::size_t, double>>> served(inst.num_arcs());
  for (std::size_t p = 0; p < count; ++p) {
    for (const auto& h : others.packets[p].hops) served[h.arc].emplace_back(h.entry, p, h.proc_end);
  }
  for (auto& list : served) std::sort(list.begin(), list.end());

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(inst.num_nodes(), inf);
  std::vector<std::size_t> via(inst.num_nodes(), inst.num_arcs());
  using Label = std::pair<double, std::size_t>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> frontier;
  best[inst.source()] = pinst.release(k);
  frontier.push({best[inst.source()], inst.source()});
  std::vector<bool> done(inst.num_nodes(), false);
  while (!frontier.empty()) {
    auto [t, v] = frontier.top();
    frontier.pop();
    if (done[v]) continue;
    done[v] = true;
    for (std::size_t e : inst.out_arcs(v)) {
      const auto& list = served[e];
      auto it = std::lower_bound(list.begin(), list.end(),
                                 std::make_tuple(t, k - 1, -inf));
      double start = t;
      if (it != list.begin()) start = std::max(start, std::get<2>(*std::prev(it)));
      const double arrive = start + pinst.beta / inst.arc(e).nu + inst.arc(e).tau;
      const std::size_t w = inst.arc(e).head;
      if (!done[w] && arrive < best[w]) {
        best[w] = arrive;
        via[w] = e;
        frontier.push({arrive, w});
      }
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t v = inst.sink(); v != inst.source(); v = inst.arc(via[v]).tail) {
    if (via[v] == inst.num_arcs()) throw PacketError("sink unreachable from source");
    path.push_back(via[v]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

BestResponse best_response_among(const PacketInstance& pinst, PacketProfile prof,
                                  std::size_t count, std::size_t k,
                                  const BestResponseOptions& opts) {
  if (opts.mode == BestResponseMode::heuristic) {
    BestResponse br;
    br.path = heuristic_path(pinst, prof, count, k);
    prof.paths[k - 1] = br.path;
    br.arrival = simulate(pinst, prof, count, count).packets[k - 1].arrival;
    return br;
  }
  BestResponse br;
  br.arrival = std::numeric_limits<double>::infinity();
  for (auto& path : simple_paths(pinst.base, opts.path_cap)) {
    prof.paths[k - 1] = path;
    const double arrival = simulate(pinst, prof, count, count).packets[k - 1].arrival;
    if (arrival < br.arrival || (arrival == br.arrival && lex_less(path, br.path))) {
      br.arrival = arrival;
      br.path = std::move(path);
    }
  }
  return br;
}

}  // namespace

PacketOutcome simulate_packets(const PacketInstance& pinst, const PacketProfile& prof) {
  pinst.validate();
  if (prof.paths.size() < pinst.packet_count) {
    throw PacketError("profile covers " + std::to_string(prof.paths.size()) + " of " +
                      std::to_string(pinst.packet_count) + " packets");
  }
  for (std::size_t p = 0; p < pinst.packet_count; ++p) check_path(pinst.base, prof.paths[p], p + 1);
  return simulate(pinst, prof, pinst.packet_count, pinst.packet_count);
}

std::vector<std::vector<std::size_t>> simple_paths(const Instance& inst, std::size_t cap) {
  std::vector<std::vector<std::size_t>> paths;
  std::vector<std::size_t> current;
  std::vector<bool> on_path(inst.num_nodes(), false);
  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    if (v == inst.sink()) {
      if (paths.size() == cap) {
        throw PacketError("more than " + std::to_string(cap) + " simple s-t paths");
      }
      paths.push_back(current);
      return;
    }
    on_path[v] = true;
    auto arcs = inst.out_arcs(v);
    std::vector<std::size_t> sorted(arcs.begin(), arcs.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t e : sorted) {
      const std::size_t w = inst.arc(e).head;
      if (on_path[w]) continue;
      current.push_back(e);
      dfs(w);
      current.pop_back();
    }
    on_path[v] = false;
  };
  dfs(inst.source());
  if (paths.empty()) throw PacketError("no simple s-t path");
  return paths;
}

BestResponse best_response(const PacketInstance& pinst, const PacketProfile& prof,
                           std::size_t k, const BestResponseOptions& opts) {
  pinst.validate();
  if (k < 1 || k > pinst.packet_count) {
    throw PacketError("packet index " + std::to_string(k) + " out of range");
  }
  simulate_packets(pinst, prof);
  return best_response_among(pinst, prof, pinst.packet_count, k, opts);
}

double best_response_residual(const PacketInstance& pinst, const PacketProfile& prof,
                              std::size_t limit) {
  const PacketOutcome out = simulate_packets(pinst, prof);
  double worst = 0.0;
  const std::size_t n = std::min(limit, pinst.packet_count);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto br = best_response_among(pinst, prof, pinst.packet_count, k, {});
    worst = std::max(worst, out.packets[k - 1].arrival - br.arrival);
  }
  return worst;
}

PacketEquilibrium find_packet_equilibrium(const PacketInstance& pinst,
                                          const EquilibriumOptions& opts) {
  pinst.validate();
  const std::size_t n = pinst.packet_count;
  const auto first_path = simple_paths(pinst.base, opts.best_response.path_cap).front();
  PacketEquilibrium result;
  result.profile.paths.assign(n, first_path);

  for (std::size_t k = 1; k <= n; ++k) {
    result.profile.paths[k - 1] =
        best_response_among(pinst, result.profile, k, k, opts.best_response).path;
  }

  BestResponseOptions exact = opts.best_response;
  exact.mode = BestResponseMode::exact;
  bool certifying = opts.best_response.mode == BestResponseMode::exact;
  std::size_t rounds = 0;
  while (rounds < opts.max_rounds) {
    ++rounds;
    const BestResponseOptions& mode = certifying ? exact : opts.best_response;
    double largest = 0.0;
    bool switched = false;
    PacketOutcome current = simulate(pinst, result.profile, n, n);
    for (std::size_t k = 1; k <= n; ++k) {
      const auto br = best_response_among(pinst, result.profile, n, k, mode);
      const double gain = current.packets[k - 1].arrival - br.arrival;
      largest = std::max(largest, gain);
      if (gain > opts.tol.eta) {
        result.profile.paths[k - 1] = br.path;
        current = simulate(pinst, result.profile, n, n);
        switched = true;
      }
    }
    result.status.max_improvement = largest;
    if (!switched) {
      if (certifying) {
        result.status.converged = true;
        break;
      }
      certifying = true;
    } else if (mode.mode == BestResponseMode::exact && opts.best_response.mode != mode.mode) {
      certifying = false;
    }
  }
  result.status.rounds = rounds;
  return result;
}

StrategyProfile embed_packets(const PacketInstance& pinst, const PacketProfile& prof,
                              const PacketOutcome& out) {
  const double u0 = pinst.base.inflow_rate();
  if (out.packets.size() != pinst.packet_count) {
    throw PacketError("packet outcome does not match the packet instance");
  }
  StrategyProfile classes;
  classes.reserve(pinst.packet_count);
  for (std::size_t k = 1; k <= pinst.packet_count; ++k) {
    StrategyClass c;
    c.path = prof.paths[k - 1];
    c.entry = EntryInterval{pinst.release(k - 1), pinst.release(k), u0};
    const double kb = pinst.beta * static_cast<double>(k);
    c.waiting.push_back(AffineWait{kb / u0, -1.0});
    for (std::size_t e : c.path) {
      const double nu = pinst.base.arc(e).nu;
      c.waiting.push_back(AffineWait{kb / nu, -u0 / nu});
    }
    c.label = "packet" + std::to_string(k);
    classes.push_back(std::move(c));
  }
  return classes;
}

}  // namespace fot
