#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fot/instance.h"

namespace fot {

/// Subset of the arcs of an instance.
class ArcSet {
 public:
  ArcSet() = default;
  explicit ArcSet(std::size_t num_arcs) : bits_(num_arcs, false) {}
  static ArcSet all(std::size_t num_arcs);
  static ArcSet of(const Instance& inst, const std::vector<std::string>& ids);

  bool contains(std::size_t e) const { return bits_[e]; }
  void insert(std::size_t e) { bits_[e] = true; }
  void erase(std::size_t e) { bits_[e] = false; }
  std::size_t universe() const { return bits_.size(); }
  std::size_t count() const;
  std::vector<std::size_t> indices() const;
  std::vector<std::string> ids(const Instance& inst) const;
  bool subset_of(const ArcSet& other) const;

  friend bool operator==(const ArcSet&, const ArcSet&) = default;

 private:
  std::vector<bool> bits_;
};

/// Active arcs E' and resetting (queued) arcs E*, with E* a subset of E'.
struct Configuration {
  ArcSet active;
  ArcSet resetting;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Restriction of the network: arcs outside `allowed` are never active and
/// arcs in `forced_queue` always carry a queue.
struct GeneralizedSubnetwork {
  ArcSet allowed;
  ArcSet forced_queue;

  static GeneralizedSubnetwork full(const Instance& inst);
};

/// Static s-t flow x' of value u0 together with the label derivatives.
struct ThinFlow {
  std::vector<double> x;  // per arc
  LabelVector lambda;     // per node
};

class ThinFlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Configuration classify_configuration(const Instance& inst, const LabelVector& l,
                                     const GeneralizedSubnetwork& sub,
                                     const Tolerance& tol = {});

struct ValidityReport {
  bool valid = true;
  /// One entry per violation, each prefixed with the condition "(i)", "(ii)"
  /// or "(iii)".
  std::vector<std::string> witnesses;

  explicit operator bool() const { return valid; }
};

/// (i) every node reachable from s in E', (ii) every resetting arc on an s-t
/// path in E', (iii) no resetting arc on a directed cycle of E'.
ValidityReport is_valid_configuration(const Instance& inst,
                                      const Configuration& cfg);

/// Maximum violation of each thin-flow condition.
struct ThinFlowResiduals {
  double conservation = 0.0;     // interior node imbalance
  double flow_value = 0.0;       // |net outflow at s - u0|, |net inflow at t - u0|
  double source_label = 0.0;     // |lambda_s - 1|
  double min_condition = 0.0;    // |lambda_w - min over active in-arcs of rho|
  double flow_carrying = 0.0;    // |lambda_w - rho_e| on arcs with x_e > 0
  double support = 0.0;          // flow on inactive arcs, negative flow
  double min_lambda = 0.0;       // smallest label derivative (must be > 0)

  double max_residual() const;
  bool passes(double eta) const;
};

ThinFlowResiduals check_thin_flow(const Instance& inst,
                                  const Configuration& cfg, const ThinFlow& tf);

struct ThinFlowOptions {
  Tolerance tol;
  /// Largest number of active arcs the exhaustive oracle accepts.
  std::size_t oracle_cap = 16;
  bool allow_oracle_fallback = true;
  /// Initial labels for the iterative solver; defaults to kappa everywhere.
  std::optional<LabelVector> warm_start;
};

struct ThinFlowStats {
  std::size_t iterations = 0;
  bool used_oracle = false;
};

/// Pattern iteration on the label derivatives: classify every active
/// non-resetting arc by the sign of lambda_w - lambda_v, solve the induced
/// linear system for lambda, route the free part of the flow with a max-flow
/// computation and reclassify until stable. Falls back to thin_flow_oracle
/// when the iteration cycles or exceeds its budget. Every returned flow has
/// passed check_thin_flow.
ThinFlow solve_thin_flow(const Instance& inst, const Configuration& cfg,
                         const ThinFlowOptions& opts = {},
                         ThinFlowStats* stats = nullptr);

/// Exhaustive support enumeration: for every split of the active
/// non-resetting arcs into (no flow / max attained by lambda_v / max attained
/// by x_e / nu_e) solve the induced linear feasibility problem. Exponential;
/// intended for small instances and as a reference for solve_thin_flow.
ThinFlow thin_flow_oracle(const Instance& inst, const Configuration& cfg,
                          const ThinFlowOptions& opts = {});

}  // namespace fot
