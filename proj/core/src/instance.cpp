#include "fot/instance.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>

namespace fot {

Instance::Instance(std::vector<std::string> nodes, std::vector<ArcSpec> arcs,
                   const std::string& source, const std::string& sink,
                   double inflow_rate)
    : node_names_(std::move(nodes)), inflow_rate_(inflow_rate) {
  for (std::size_t v = 0; v < node_names_.size(); ++v) {
    if (!node_lookup_.emplace(node_names_[v], v).second) {
      throw InstanceError("duplicate node id '" + node_names_[v] + "'");
    }
  }
  if (!(inflow_rate_ > 0.0) || !std::isfinite(inflow_rate_)) {
    throw InstanceError("u0 must be strictly positive");
  }
  auto resolve = [&](const std::string& name, const char* what) {
    auto it = node_lookup_.find(name);
    if (it == node_lookup_.end()) {
      throw InstanceError(std::string(what) + " references unknown node '" +
                          name + "'");
    }
    return it->second;
  };
  source_ = resolve(source, "source");
  sink_ = resolve(sink, "sink");
  if (source_ == sink_) throw InstanceError("source and sink must differ");

  arcs_.reserve(arcs.size());
  out_.resize(node_names_.size());
  in_.resize(node_names_.size());
  for (auto& spec : arcs) {
    if (!(spec.tau > 0.0) || !std::isfinite(spec.tau)) {
      throw InstanceError("arc '" + spec.id + "': tau must be strictly positive");
    }
    if (!(spec.nu > 0.0) || !std::isfinite(spec.nu)) {
      throw InstanceError("arc '" + spec.id + "': nu must be strictly positive");
    }
    const std::size_t e = arcs_.size();
    if (!arc_lookup_.emplace(spec.id, e).second) {
      throw InstanceError("duplicate arc id '" + spec.id + "'");
    }
    Arc arc{spec.id, resolve(spec.from, "arc from"), resolve(spec.to, "arc to"),
            spec.tau, spec.nu};
    out_[arc.tail].push_back(e);
    in_[arc.head].push_back(e);
    arcs_.push_back(std::move(arc));
  }
}

std::optional<std::size_t> Instance::find_node(std::string_view name) const {
  auto it = node_lookup_.find(std::string(name));
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Instance::find_arc(std::string_view id) const {
  auto it = arc_lookup_.find(std::string(id));
  if (it == arc_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Instance::node_index(std::string_view name) const {
  if (auto v = find_node(name)) return *v;
  throw InstanceError("unknown node '" + std::string(name) + "'");
}

std::size_t Instance::arc_index(std::string_view id) const {
  if (auto e = find_arc(id)) return *e;
  throw InstanceError("unknown arc '" + std::string(id) + "'");
}

double Instance::min_capacity() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : arcs_) m = std::min(m, a.nu);
  return m;
}

double Instance::total_transit_time() const {
  double sum = 0.0;
  for (const auto& a : arcs_) sum += a.tau;
  return sum;
}

double Instance::kappa() const {
  if (arcs_.empty()) return 1.0;
  return std::max(1.0, inflow_rate_ / min_capacity());
}

double Instance::capacity_sum() const {
  double sum = inflow_rate_;
  for (const auto& a : arcs_) sum += a.nu;
  return sum;
}

bool operator==(const Instance& a, const Instance& b) {
  if (a.node_names_ != b.node_names_ || a.source_ != b.source_ ||
      a.sink_ != b.sink_ || a.inflow_rate_ != b.inflow_rate_ ||
      a.arcs_.size() != b.arcs_.size()) {
    return false;
  }
  for (std::size_t e = 0; e < a.arcs_.size(); ++e) {
    const Arc& x = a.arcs_[e];
    const Arc& y = b.arcs_[e];
    if (x.id != y.id || x.tail != y.tail || x.head != y.head ||
        x.tau != y.tau || x.nu != y.nu) {
      return false;
    }
  }
  return true;
}

LabelVector LabelVector::advanced(const LabelVector& direction,
                                  double t) const {
  LabelVector out(*this);
  for (std::size_t v = 0; v < values_.size(); ++v) {
    out.values_[v] += t * direction.values_[v];
  }
  return out;
}

double distance_inf(const LabelVector& a, const LabelVector& b) {
  double d = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    d = std::max(d, std::abs(a[v] - b[v]));
  }
  return d;
}

double arc_slack(const Instance& inst, const LabelVector& l, std::size_t e) {
  const Arc& a = inst.arc(e);
  return l[a.head] - l[a.tail] - a.tau;
}

namespace {

std::vector<bool> reachable(const Instance& inst, std::size_t start,
                            bool forward) {
  std::vector<bool> seen(inst.num_nodes(), false);
  std::deque<std::size_t> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    const auto arcs = forward ? inst.out_arcs(v) : inst.in_arcs(v);
    for (std::size_t e : arcs) {
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

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> violations;
  const auto from_source = reachable(inst, inst.source(), true);
  const auto to_sink = reachable(inst, inst.sink(), false);
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (!from_source[v]) {
      violations.push_back(inst.node_name(v) + " unreachable from source");
    } else if (!to_sink[v]) {
      violations.push_back(inst.node_name(v) + " cannot reach sink");
    }
  }
  return violations;
}

LabelVector empty_network_labels(const Instance& inst) {
  const double inf = std::numeric_limits<double>::infinity();
  LabelVector dist(inst.num_nodes(), inf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  dist[inst.source()] = 0.0;
  frontier.push({0.0, inst.source()});
  while (!frontier.empty()) {
    auto [d, v] = frontier.top();
    frontier.pop();
    if (d > dist[v]) continue;
    for (std::size_t e : inst.out_arcs(v)) {
      const Arc& a = inst.arc(e);
      if (d + a.tau < dist[a.head]) {
        dist[a.head] = d + a.tau;
        frontier.push({dist[a.head], a.head});
      }
    }
  }
  return dist;
}

double hyperplane_distance(const Instance& inst, const LabelVector& l,
                           std::size_t e) {
  // Moving l_v up and l_w down by the same amount closes the slack fastest.
  return std::abs(arc_slack(inst, l, e)) / 2.0;
}

}  // namespace fot
