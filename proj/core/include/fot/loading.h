#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "fot/instance.h"
#include "fot/profile.h"
#include "fot/pwl.h"
#include "fot/thinflow.h"

namespace fot {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadOptions {
  /// Require interval classes to cover their entry hull at total rate u0.
  bool check_coverage = true;
  /// Upper bound on processed pieces before giving up.
  std::size_t piece_cap = 20'000'000;
};

/// Departure times of a contiguous range of a class's agents from one node.
/// Agents are parametrised by a coordinate sigma: the entry time for interval
/// classes, the mass position in [0, mass) for atom classes.
struct DeparturePiece {
  double s0 = 0.0;
  double s1 = 0.0;
  double d0 = 0.0;     // departure at sigma = s0
  double slope = 0.0;  // d(sigma) = d0 + slope * (sigma - s0)

  double at(double sigma) const { return d0 + slope * (sigma - s0); }
};

/// Result of loading a strategy profile: cumulative arc flows and the
/// departure time of every agent from every node on its path.
class Outcome {
 public:
  Outcome(Instance inst, StrategyProfile profile, std::vector<PiecewiseLinear> inflow,
          std::vector<PiecewiseLinear> queue_out,
          std::vector<std::vector<std::vector<DeparturePiece>>> departures,
          double horizon);

  const Instance& instance() const { return inst_; }
  const StrategyProfile& profile() const { return profile_; }
  /// End of the covered entry interval; label queries are valid up to here.
  double horizon() const { return horizon_; }

  /// Cumulative inflow F+_e (right-continuous; atoms are jumps).
  const PiecewiseLinear& inflow(std::size_t e) const { return inflow_[e]; }
  /// Cumulative outflow F-_e.
  PiecewiseLinear outflow(std::size_t e) const;
  /// Cumulative mass that has left the queue of e (continuous).
  const PiecewiseLinear& queue_output(std::size_t e) const { return queue_out_[e]; }
  /// Queue volume z_e(xi) = F+_e(xi) - F-_e(xi + tau_e), right-continuous.
  double queue(std::size_t e, double xi) const;
  double queue_left(std::size_t e, double xi) const;

  /// Departure pieces of class c from the i-th node of its path, by sigma.
  const std::vector<DeparturePiece>& departures(std::size_t c, std::size_t i) const {
    return departures_[c][i];
  }
  /// Departure time of the agent of class c with coordinate sigma.
  double departure(std::size_t c, std::size_t i, double sigma) const;

  /// Earliest-arrival label functions theta -> l_v(theta), one per node.
  const std::vector<PiecewiseLinear>& label_functions() const;

 private:
  Instance inst_;
  StrategyProfile profile_;
  std::vector<PiecewiseLinear> inflow_;
  std::vector<PiecewiseLinear> queue_out_;
  std::vector<std::vector<std::vector<DeparturePiece>>> departures_;
  double horizon_;
  struct LabelCache {
    std::once_flag once;
    std::vector<PiecewiseLinear> labels;
  };
  std::shared_ptr<LabelCache> labels_;
};

/// Network loading for a finite profile. Processes windows of length
/// min_e tau_e in which arc inflows are already determined, serving each arc
/// FIFO at rate nu_e with simultaneous arrivals ordered by network entry
/// time and then by class index.
Outcome load_profile(const Instance& inst, const StrategyProfile& profile,
                     const LoadOptions& opts = {});

/// Per-arc traversal time xi -> xi + tau_e + z_e(xi) / nu_e.
PiecewiseLinear arc_exit_function(const Outcome& out, std::size_t e);

/// Label-setting evaluation of the Bellman equations at one entry time.
/// Queues are evaluated right-continuously.
LabelVector earliest_arrival_labels(const Instance& inst, const Outcome& out,
                                    double theta);

/// Label functions via |V|-1 rounds of Bellman-Ford over composed arc exit
/// functions.
std::vector<PiecewiseLinear> compute_label_functions(const Outcome& out);

/// Restricts which agents enter a supremum: only entry times within
/// [entry_min, entry_max].
struct MeasureWindow {
  double entry_min = -std::numeric_limits<double>::infinity();
  double entry_max = std::numeric_limits<double>::infinity();
};

/// sup over agents of d_t(a) - l_t(entry(a)).
double measure_epsilon(const Instance& inst, const Outcome& out,
                       const MeasureWindow& window = {});

/// sup over agents and path nodes v of d_v(a) - l_v(entry(a)).
double measure_strict_delta(const Instance& inst, const Outcome& out,
                            const MeasureWindow& window = {});

/// Mass of agents entering after the earliest member of class c whose
/// earliest arrival at node v precedes that member's departure from v.
double measure_overtaking(const Instance& inst, const Outcome& out, std::size_t c,
                          std::size_t v);

struct FlowResidualReport {
  double upper_bound = 0.0;        // max over allowed arcs of dx_e - nu_e dl_w
  double forced_equality = 0.0;    // max over forced arcs of |dx_e - nu_e dl_w|
  double outside_flow = 0.0;       // max over arcs outside the subnetwork of dx_e
  double node_imbalance = 0.0;     // deviation from an s-t flow of value u0 dtheta
  double direction_gap = 0.0;      // |dl / dtheta - reference lambda|_inf
};

/// Compares the change of labels and arc inflows over [theta_a, theta_b] with
/// a thin flow.
FlowResidualReport thin_flow_residuals(const Instance& inst, const Outcome& out,
                                       double theta_a, double theta_b,
                                       const GeneralizedSubnetwork& sub,
                                       const ThinFlow& reference);

/// Constants of the approximate Lipschitz bound l_v(b) <= l_v(a) + K (b - a)
/// + j eps: K = kappa |V| and j = 3 K nu_Sigma.
struct LipschitzConstants {
  double k = 0.0;
  double j = 0.0;
};
LipschitzConstants approximate_lipschitz_constants(const Instance& inst);

/// Largest excess of l_v(b) - l_v(a) - K (b - a) - j eps over grid pairs
/// a < b; nonpositive when the bound holds.
double approximate_lipschitz_excess(const Instance& inst, const Outcome& out,
                                    const std::vector<double>& grid, double epsilon);

}  // namespace fot
