#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fot/instance.h"
#include "fot/profile.h"
#include "fot/thinflow.h"

namespace fot {

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximal linear segment of an equilibrium trajectory.
struct Phase {
  double theta_start = 0.0;
  double theta_end = std::numeric_limits<double>::infinity();
  LabelVector label_start;
  LabelVector direction;  // equals flow.lambda
  /// Configuration in the interior of the phase.
  Configuration config;
  ThinFlow flow;
  /// Set when the phase starts on several hyperplanes at once and the
  /// configuration was resolved jointly.
  bool joint_reclassification = false;

  bool infinite() const { return theta_end == std::numeric_limits<double>::infinity(); }
  LabelVector at(double theta) const {
    return label_start.advanced(direction, theta - theta_start);
  }
};

struct TrajectoryOptions {
  Tolerance tol;
  /// Defaults to default_horizon(inst).
  std::optional<double> horizon;
  /// Defaults to 10 * 2^|E| (saturating).
  std::optional<std::size_t> phase_cap;
  ThinFlowOptions thin_flow;
};

class Trajectory {
 public:
  Trajectory(Instance inst, GeneralizedSubnetwork sub, std::vector<Phase> phases,
             double horizon, std::size_t degenerate_steps);

  const Instance& instance() const { return inst_; }
  const GeneralizedSubnetwork& subnetwork() const { return sub_; }
  const std::vector<Phase>& phases() const { return phases_; }
  double horizon() const { return horizon_; }
  /// Number of zero-length reclassifications skipped while computing.
  std::size_t degenerate_steps() const { return degenerate_steps_; }
  /// Last theta at which the trajectory is defined (infinity in steady state).
  double end() const { return phases_.back().theta_end; }

 private:
  Instance inst_;
  GeneralizedSubnetwork sub_;
  std::vector<Phase> phases_;
  double horizon_;
  std::size_t degenerate_steps_;
};

/// 4 * (sum of transit times) * kappa.
double default_horizon(const Instance& inst);

Trajectory compute_trajectory(const Instance& inst,
                              const GeneralizedSubnetwork& sub,
                              const LabelVector& start,
                              const TrajectoryOptions& opts = {});

LabelVector evaluate_trajectory(const Trajectory& traj, double theta);

struct SteadyStateInfo {
  bool reached = false;
  double t_ss = std::numeric_limits<double>::quiet_NaN();
  LabelVector lambda_ss;
  /// Arc classification at the steady-state start: every arc of the
  /// subnetwork with lambda_w > lambda_v is active and no arc with
  /// lambda_w < lambda_v has a queue. Empty when they hold.
  std::vector<std::string> violations;
};

SteadyStateInfo steady_state_info(const Trajectory& traj);

/// Path decomposition of every phase's thin flow into constant-rate entry
/// classes with zero waiting. The final phase runs until `horizon`
/// (defaults to the trajectory horizon).
StrategyProfile derive_exact_profile(const Trajectory& traj,
                                     std::optional<double> horizon = {});

/// Lowers labels until every resetting arc has an active path to the sink.
/// Each step lowers all labels reachable (via active arcs) from the heads of
/// offending arcs until an outgoing arc turns active or an incoming queued
/// arc loses its queue.
LabelVector project_to_valid(const Instance& inst, const LabelVector& l,
                             const Tolerance& tol = {});

}  // namespace fot
