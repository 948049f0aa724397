#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fot {

/// Shared geometric tolerance. Every comparison of labels against arc
/// hyperplanes, every thin-flow residual gate and every event merge uses it.
struct Tolerance {
  double eta = 1e-9;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by parse_instance; the message is prefixed with a JSON field path
/// such as "arcs[2].tau".
class ParseError : public InstanceError {
 public:
  ParseError(std::string path, const std::string& message)
      : InstanceError(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ArcSpec {
  std::string id;
  std::string from;
  std::string to;
  double tau = 0.0;
  double nu = 0.0;
};

struct Arc {
  std::string id;
  std::size_t tail = 0;
  std::size_t head = 0;
  double tau = 0.0;  // free-flow transit time
  double nu = 0.0;   // capacity
};

/// Single-commodity network with constant inflow rate u0 at the source.
/// Node and arc identifiers are external strings; internally nodes and arcs
/// are dense indices in declaration order. Immutable once constructed.
class Instance {
 public:
  /// Throws InstanceError when tau, nu or u0 are not strictly positive,
  /// ids are duplicated, or an arc references an unknown node.
  Instance(std::vector<std::string> nodes, std::vector<ArcSpec> arcs,
           const std::string& source, const std::string& sink,
           double inflow_rate);

  std::size_t num_nodes() const { return node_names_.size(); }
  std::size_t num_arcs() const { return arcs_.size(); }

  const std::string& node_name(std::size_t v) const { return node_names_[v]; }
  const std::vector<std::string>& node_names() const { return node_names_; }
  const Arc& arc(std::size_t e) const { return arcs_[e]; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  std::size_t source() const { return source_; }
  std::size_t sink() const { return sink_; }
  double inflow_rate() const { return inflow_rate_; }

  std::optional<std::size_t> find_node(std::string_view name) const;
  std::optional<std::size_t> find_arc(std::string_view id) const;
  std::size_t node_index(std::string_view name) const;
  std::size_t arc_index(std::string_view id) const;

  std::span<const std::size_t> out_arcs(std::size_t v) const { return out_[v]; }
  std::span<const std::size_t> in_arcs(std::size_t v) const { return in_[v]; }

  double min_capacity() const;
  double total_transit_time() const;
  /// kappa = max{1, u0 / min_e nu_e}; Lipschitz constant of equilibrium
  /// trajectories and upper bound on thin-flow labels.
  double kappa() const;
  /// nu_Sigma = sum_e nu_e + u0.
  double capacity_sum() const;

  friend bool operator==(const Instance& a, const Instance& b);

 private:
  std::vector<std::string> node_names_;
  std::vector<Arc> arcs_;
  std::size_t source_ = 0;
  std::size_t sink_ = 0;
  double inflow_rate_ = 0.0;
  std::unordered_map<std::string, std::size_t> node_lookup_;
  std::unordered_map<std::string, std::size_t> arc_lookup_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

/// One time value per node, indexed like Instance nodes.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  explicit LabelVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t v) { return values_[v]; }
  double operator[](std::size_t v) const { return values_[v]; }
  const std::vector<double>& values() const { return values_; }

  /// this + t * direction
  LabelVector advanced(const LabelVector& direction, double t) const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<double> values_;
};

double distance_inf(const LabelVector& a, const LabelVector& b);

/// Slack l_w - l_v - tau_e of arc e = vw under labels l.
double arc_slack(const Instance& inst, const LabelVector& l, std::size_t e);

std::vector<std::string> validate_instance(const Instance& inst);

/// Free-flow shortest path distances from the source.
LabelVector empty_network_labels(const Instance& inst);

/// Infinity-norm distance from l to the hyperplane {l : l_w - l_v = tau_e}.
double hyperplane_distance(const Instance& inst, const LabelVector& l,
                           std::size_t e);

}  // namespace fot
