#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fot/instance.h"
#include "fot/loading.h"
#include "fot/trajectory.h"

namespace fot {

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform grid 0, h, 2h, ... up to `end` (inclusive within rounding).
std::vector<double> uniform_grid(double end, double h);

/// max over grid points of |earliest_arrival_labels(out, theta) -
/// evaluate_trajectory(traj, theta)|_inf. Throws SweepError when the grid
/// leaves either horizon.
double sup_distance(const Trajectory& traj, const Outcome& out,
                    const std::vector<double>& grid);

struct SweepConfig {
  /// Either `instance` or `instance_path` must be given.
  std::optional<Instance> instance;
  std::filesystem::path instance_path;
  std::vector<double> betas;  // strictly decreasing, positive
  double horizon = 10.0;      // Theta_max
  double grid_step = 0.01;
  std::size_t max_rounds = 50;
  /// Packets whose exact best-response residual is re-checked per row.
  std::size_t residual_packets = 50;
  Tolerance tol;
  /// When false, wall_ms is written as 0 so repeated sweeps are
  /// byte-identical.
  bool record_wall_time = true;
  /// Number of rows computed concurrently.
  std::size_t threads = 1;

  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
  std::filesystem::path plot_path;

  /// Throws SweepError naming the first invalid field.
  void validate() const;
};

struct SweepRow {
  double beta = 0.0;
  double epsilon = 0.0;
  double strict_delta = 0.0;
  double sup_distance = 0.0;
  std::string status;
  double wall_ms = 0.0;

  std::size_t packet_count = 0;
  std::size_t rounds = 0;
  double best_response_residual = 0.0;
  /// Bound on what the grid can miss between two grid points:
  /// (K + kappa) h + j epsilon with the approximate-Lipschitz constants.
  double grid_error_bound = 0.0;
  /// Error message of the failed stage, empty otherwise.
  std::string detail;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// theta followed by (l_v, l*_v) per node for the smallest beta.
  std::vector<std::vector<double>> plot;
  std::vector<std::string> plot_header;
};

/// For each beta: packet equilibrium, simulation, embedding, loading, and
/// the measures against the exact trajectory from the empty network. Stage
/// failures are recorded in the row status. Writes the report files whose
/// paths are non-empty.
SweepResult run_convergence_sweep(const SweepConfig& cfg);

struct ReportPaths {
  std::filesystem::path csv;
  std::filesystem::path summary;
  std::filesystem::path plot;
};

/// Least-squares slope of log(sup_distance) against log(beta); empty when
/// fewer than two usable rows exist.
std::optional<double> fitted_log_slope(const std::vector<SweepRow>& rows);

/// CSV with header beta,epsilon,strict_delta,sup_distance,status,wall_ms.
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_summary_json(const std::vector<SweepRow>& rows);

/// Writes the CSV, the JSON summary and (when given) the plot data.
void export_report(const std::vector<SweepRow>& rows, const ReportPaths& paths,
                   const SweepResult* plot_source = nullptr);

}  // namespace fot
