#include "fot/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "fot/io.h"
#include "fot/packets.h"
#include "json.hpp"

namespace fot {

using nlohmann::json;

std::vector<double> uniform_grid(double end, double h) {
  if (!(h > 0.0)) throw SweepError("grid step must be positive");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor(end / h + 1e-9));
  grid.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * h);
  return grid;
}

double sup_distance(const Trajectory& traj, const Outcome& out,
                    const std::vector<double>& grid) {
  if (grid.empty()) return 0.0;
  const double last = *std::max_element(grid.begin(), grid.end());
  if (last > traj.end() || last > out.horizon()) {
    std::ostringstream msg;
    msg << "horizon mismatch: grid reaches " << last << " but trajectory ends at "
        << traj.end() << " and outcome at " << out.horizon();
    throw SweepError(msg.str());
  }
  double worst = 0.0;
  for (double theta : grid) {
    const auto measured = earliest_arrival_labels(out.instance(), out, theta);
    worst = std::max(worst, distance_inf(measured, evaluate_trajectory(traj, theta)));
  }
  return worst;
}

void SweepConfig::validate() const {
  if (betas.empty()) throw SweepError("betas must be non-empty");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw SweepError("betas must be strictly positive");
    if (i > 0 && !(betas[i] < betas[i - 1])) {
      throw SweepError("betas must be strictly decreasing");
    }
  }
  if (!(grid_step > 0.0)) throw SweepError("grid step must be positive");
  if (!(horizon > 0.0)) throw SweepError("horizon must be positive");
  if (!instance && instance_path.empty()) throw SweepError("no instance given");
}

namespace {

// Smallest packet count whose last release lies beyond horizon plus the
// free-flow diameter.
std::size_t packet_count_for(const Instance& inst, double beta, double horizon) {
  const auto free_flow = empty_network_labels(inst);
  double diameter = 0.0;
  for (double v : free_flow.values()) {
    if (std::isfinite(v)) diameter = std::max(diameter, v);
  }
  const double span = (horizon + diameter) * inst.inflow_rate() / beta;
  return static_cast<std::size_t>(std::floor(span)) + 1;
}

struct RowJob {
  SweepRow row;
  std::vector<std::vector<double>> plot;
};

RowJob run_row(const Instance& inst, const Trajectory& traj, const SweepConfig& cfg,
               double beta, const std::vector<double>& grid, bool want_plot) {
  RowJob job;
  SweepRow& row = job.row;
  row.beta = beta;
  const auto started = std::chrono::steady_clock::now();
  std::string stage = "packet_eq";
  try {
    PacketInstance pinst{inst, beta, packet_count_for(inst, beta, cfg.horizon)};
    row.packet_count = pinst.packet_count;
    EquilibriumOptions eo;
    eo.max_rounds = cfg.max_rounds;
    eo.tol = cfg.tol;
    const auto eq = find_packet_equilibrium(pinst, eo);
    row.rounds = eq.status.rounds;
    row.status = eq.status.converged ? "converged" : "packet_eq_not_converged";
    row.best_response_residual =
        best_response_residual(pinst, eq.profile, cfg.residual_packets);
    if (row.best_response_residual > cfg.tol.eta) row.status = "packet_eq_not_converged";

    stage = "simulate";
    const auto pout = simulate_packets(pinst, eq.profile);
    stage = "load";
    const auto out = load_profile(inst, embed_packets(pinst, eq.profile, pout));
    stage = "measure";
    const MeasureWindow window{-std::numeric_limits<double>::infinity(), cfg.horizon};
    row.epsilon = measure_epsilon(inst, out, window);
    row.strict_delta = measure_strict_delta(inst, out, window);
    row.sup_distance = sup_distance(traj, out, grid);
    const auto lip = approximate_lipschitz_constants(inst);
    row.grid_error_bound = (lip.k + inst.kappa()) * cfg.grid_step + lip.j * row.epsilon;
    if (want_plot) {
      for (double theta : grid) {
        std::vector<double> line{theta};
        const auto measured = earliest_arrival_labels(inst, out, theta);
        const auto exact = evaluate_trajectory(traj, theta);
        for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
          line.push_back(measured[v]);
          line.push_back(exact[v]);
        }
        job.plot.push_back(std::move(line));
      }
    }
  } catch (const std::exception& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (stage != "measure") row.epsilon = row.strict_delta = nan;
    row.sup_distance = nan;
    row.status = stage + "_failed";
    row.detail = e.what();
  }
  if (cfg.record_wall_time) {
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
  }
  return job;
}

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

}  // namespace

SweepResult run_convergence_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const Instance inst = cfg.instance ? *cfg.instance : load_instance(cfg.instance_path);
  TrajectoryOptions topts;
  topts.tol = cfg.tol;
  topts.horizon = std::max(default_horizon(inst), cfg.horizon);
  const Trajectory traj = compute_trajectory(inst, GeneralizedSubnetwork::full(inst),
                                             empty_network_labels(inst), topts);
  const auto grid = uniform_grid(cfg.horizon, cfg.grid_step);

  std::vector<RowJob> jobs(cfg.betas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      jobs[i] = run_row(inst, traj, cfg, cfg.betas[i], grid, i + 1 == jobs.size());
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult result;
  for (auto& job : jobs) result.rows.push_back(job.row);
  result.plot = std::move(jobs.back().plot);
  result.plot_header.push_back("theta");
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    result.plot_header.push_back("l_" + inst.node_name(v));
    result.plot_header.push_back("exact_" + inst.node_name(v));
  }
  if (!cfg.csv_path.empty() || !cfg.summary_path.empty() || !cfg.plot_path.empty()) {
    export_report(result.rows, {cfg.csv_path, cfg.summary_path, cfg.plot_path}, &result);
  }
  return result;
}

std::optional<double> fitted_log_slope(const std::vector<SweepRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.beta > 0.0 && r.sup_distance > 0.0 && std::isfinite(r.sup_distance)) {
      pts.emplace_back(std::log(r.beta), std::log(r.sup_distance));
    }
  }
  if (pts.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  auto sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.beta > b.beta; });
  std::ostringstream csv;
  csv << "beta,epsilon,strict_delta,sup_distance,status,wall_ms\n";
  for (const auto& r : sorted) {
    csv << format_number(r.beta) << ',' << format_number(r.epsilon) << ','
        << format_number(r.strict_delta) << ',' << format_number(r.sup_distance) << ','
        << r.status << ',' << format_number(std::round(r.wall_ms)) << '\n';
  }
  return csv.str();
}

std::string sweep_summary_json(const std::vector<SweepRow>& rows) {
  json doc;
  json jrows = json::array();
  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = 0.0;
  bool eps_le_delta = true;
  for (const auto& r : rows) {
    json jr{{"beta", r.beta},
            {"epsilon", r.epsilon},
            {"strict_delta", r.strict_delta},
            {"sup_distance", r.sup_distance},
            {"status", r.status},
            {"packet_count", r.packet_count},
            {"rounds", r.rounds},
            {"best_response_residual", r.best_response_residual},
            {"grid_error_bound", r.grid_error_bound}};
    if (!r.detail.empty()) jr["detail"] = r.detail;
    jrows.push_back(std::move(jr));
    if (std::isfinite(r.strict_delta) && r.strict_delta > 0.0) {
      ratio_min = std::min(ratio_min, r.strict_delta / r.beta);
      ratio_max = std::max(ratio_max, r.strict_delta / r.beta);
    }
    if (r.epsilon > r.strict_delta) eps_le_delta = false;
  }
  doc["rows"] = std::move(jrows);
  if (auto slope = fitted_log_slope(rows)) {
    doc["log_log_slope"] = *slope;
  } else {
    doc["log_log_slope"] = "not-available";
  }
  if (ratio_max > 0.0) {
    doc["delta_over_beta"] = {{"min", ratio_min}, {"max", ratio_max},
                              {"band", ratio_max / ratio_min}};
  }
  doc["epsilon_le_delta"] = eps_le_delta;
  if (rows.size() >= 2) {
    auto by_beta = rows;
    std::sort(by_beta.begin(), by_beta.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.beta > b.beta; });
    doc["monotone_trend"] = by_beta.back().sup_distance < by_beta.front().sup_distance;
  }
  return doc.dump(2);
}

void export_report(const std::vector<SweepRow>& rows, const ReportPaths& paths,
                   const SweepResult* plot_source) {
  if (rows.empty()) throw SweepError("no sweep rows to export");
  if (!paths.csv.empty()) write_text_file(paths.csv, sweep_csv(rows));
  if (!paths.summary.empty()) write_text_file(paths.summary, sweep_summary_json(rows));
  if (!paths.plot.empty() && plot_source) {
    std::ostringstream out;
    for (std::size_t i = 0; i < plot_source->plot_header.size(); ++i) {
      out << (i ? "," : "") << plot_source->plot_header[i];
    }
    out << '\n' << std::setprecision(12);
    for (const auto& line : plot_source->plot) {
      for (std::size_t i = 0; i < line.size(); ++i) out << (i ? "," : "") << line[i];
      out << '\n';
    }
    write_text_file(paths.plot, out.str());
  }
}

}  // namespace fot
