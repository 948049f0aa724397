// fot: command line front end for equilibria, thin flows, packets and sweeps.

#include <cmath>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fot/harness.h"
#include "fot/io.h"
#include "fot/loading.h"
#include "fot/packets.h"
#include "fot/trajectory.h"
#include "json.hpp"

namespace {

using nlohmann::json;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
  } else {
    fot::write_text_file(path, text + "\n");
  }
}

std::vector<double> parse_betas(const std::string& list) {
  std::vector<double> betas;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double b = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad beta '" + item + "'");
    betas.push_back(b);
  }
  return betas;
}

int run_nash(const std::string& instance_path, double horizon, const std::string& out,
             const std::string& profile_out) {
  const auto inst = fot::load_instance(instance_path);
  fot::TrajectoryOptions opts;
  if (horizon > 0.0) opts.horizon = horizon;
  const auto traj = fot::compute_trajectory(inst, fot::GeneralizedSubnetwork::full(inst),
                                            fot::empty_network_labels(inst), opts);
  emit(out, fot::trajectory_to_json(traj));
  const auto ss = fot::steady_state_info(traj);
  if (ss.reached) {
    std::cerr << "steady state from theta = " << ss.t_ss << '\n';
  } else {
    std::cerr << "no steady state before theta = " << traj.end() << '\n';
  }
  if (!profile_out.empty()) {
    const double until = horizon > 0.0 ? horizon : traj.horizon();
    emit(profile_out, fot::profile_to_json(inst, fot::derive_exact_profile(traj, until)));
  }
  return 0;
}

int run_thinflow(const std::string& config_path, const std::string& out, bool oracle) {
  const auto request = fot::parse_thin_flow_request(
      fot::read_text_file(config_path), std::filesystem::path(config_path).parent_path());
  const auto& inst = request.instance;
  if (!request.config.active.subset_of(request.subnetwork.allowed) ||
      !request.subnetwork.forced_queue.subset_of(request.config.resetting)) {
    std::cerr << "configuration does not respect the given subnetwork\n";
    return 1;
  }
  const auto validity = fot::is_valid_configuration(inst, request.config);
  if (!validity.valid) {
    for (const auto& w : validity.witnesses) std::cerr << "invalid configuration: " << w << '\n';
    return 1;
  }
  const auto tf = oracle ? fot::thin_flow_oracle(inst, request.config)
                         : fot::solve_thin_flow(inst, request.config);
  emit(out, fot::thin_flow_to_json(inst, tf));
  return 0;
}

struct PacketArgs {
  std::string instance;
  double beta = 1.0;
  std::size_t count = 10;
  bool find_equilibrium = false;
  std::string profile;
  std::size_t max_rounds = 50;
  std::string out;
  std::string outcome_csv;
};

int run_packets(const PacketArgs& args) {
  const auto inst = fot::load_instance(args.instance);
  fot::PacketInstance pinst{inst, args.beta, args.count};
  pinst.validate();
  fot::PacketProfile prof;
  if (args.find_equilibrium) {
    fot::EquilibriumOptions opts;
    opts.max_rounds = args.max_rounds;
    const auto eq = fot::find_packet_equilibrium(pinst, opts);
    prof = eq.profile;
    std::cerr << (eq.status.converged ? "converged" : "packet_eq_not_converged") << " after "
              << eq.status.rounds << " rounds, max improvement " << eq.status.max_improvement
              << '\n';
  } else if (!args.profile.empty()) {
    prof = fot::parse_packet_profile(inst, fot::read_text_file(args.profile));
  } else {
    prof.paths.assign(args.count, fot::simple_paths(inst).front());
  }
  const auto outcome = fot::simulate_packets(pinst, prof);
  emit(args.out, fot::packet_profile_to_json(inst, prof));
  if (!args.outcome_csv.empty()) {
    fot::write_text_file(args.outcome_csv, fot::packet_outcome_csv(inst, outcome));
  }
  return 0;
}

struct VerifyArgs {
  std::string instance;
  std::string profile;
  std::string report;
  std::string outcome_csv;
  double theta_a = NAN;
  double theta_b = NAN;
};

int run_verify(const VerifyArgs& args) {
  const auto inst = fot::load_instance(args.instance);
  const auto profile = fot::parse_profile(inst, fot::read_text_file(args.profile));
  const auto out = fot::load_profile(inst, profile);
  json report;
  report["epsilon"] = fot::measure_epsilon(inst, out);
  report["strict_delta"] = fot::measure_strict_delta(inst, out);
  json residuals;
  double overtaking = 0.0;
  for (std::size_t c = 0; c < profile.size(); ++c) {
    overtaking = std::max(overtaking, fot::measure_overtaking(inst, out, c, inst.sink()));
  }
  residuals["max_overtaking_at_sink"] = overtaking;
  const auto grid = fot::uniform_grid(out.horizon(), out.horizon() / 200.0);
  residuals["lipschitz_excess"] =
      fot::approximate_lipschitz_excess(inst, out, grid, report["epsilon"].get<double>());

  fot::TrajectoryOptions topts;
  topts.horizon = std::max(fot::default_horizon(inst), out.horizon());
  const auto traj = fot::compute_trajectory(inst, fot::GeneralizedSubnetwork::full(inst),
                                            fot::empty_network_labels(inst), topts);
  double ta = args.theta_a;
  double tb = args.theta_b;
  const auto ss = fot::steady_state_info(traj);
  if (std::isnan(ta) && ss.reached) ta = ss.t_ss;
  if (std::isnan(tb)) tb = out.horizon();
  if (!std::isnan(ta) && ta < tb) {
    const fot::Phase* phase = &traj.phases().back();
    for (const auto& ph : traj.phases()) {
      if (ph.theta_start <= ta && ta < ph.theta_end) phase = &ph;
    }
    const auto r = fot::thin_flow_residuals(inst, out, ta, tb, traj.subnetwork(), phase->flow);
    residuals["thin_flow"] = {{"theta_a", ta},
                              {"theta_b", tb},
                              {"upper_bound", r.upper_bound},
                              {"forced_equality", r.forced_equality},
                              {"outside_flow", r.outside_flow},
                              {"node_imbalance", r.node_imbalance},
                              {"direction_gap", r.direction_gap}};
  }
  const auto last = grid.back();
  if (last <= traj.end()) residuals["sup_distance_to_exact"] = fot::sup_distance(traj, out, grid);
  report["residuals"] = residuals;
  emit(args.report, report.dump(2));
  if (!args.outcome_csv.empty()) fot::write_text_file(args.outcome_csv, fot::outcome_csv(out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic equilibria, thin flows and packet routing in the queueing model"};
  app.require_subcommand(1);

  std::string instance_path, out, profile_out;
  double horizon = 0.0;
  auto* nash = app.add_subcommand("nash", "Exact equilibrium trajectory from the empty network");
  nash->add_option("--instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  nash->add_option("--horizon", horizon, "Time horizon (default: 4 * sum(tau) * kappa)");
  nash->add_option("--out", out, "Trajectory JSON output (default: stdout)");
  nash->add_option("--profile-out", profile_out, "Also write the exact strategy profile");

  std::string config_path;
  bool oracle = false;
  auto* thinflow = app.add_subcommand("thinflow", "Solve the thin flow of one configuration");
  thinflow->add_option("--config", config_path, "Configuration JSON")->required()->check(CLI::ExistingFile);
  thinflow->add_option("--out", out, "Output JSON (default: stdout)");
  thinflow->add_flag("--oracle", oracle, "Use the brute-force oracle");

  PacketArgs pargs;
  auto* packets = app.add_subcommand("packets", "Simulate packets or search a packet equilibrium");
  packets->add_option("--instance", pargs.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
  packets->add_option("--beta", pargs.beta, "Packet size")->check(CLI::PositiveNumber);
  packets->add_option("--count", pargs.count, "Number of packets")->check(CLI::PositiveNumber);
  packets->add_flag("--find-equilibrium", pargs.find_equilibrium, "Run best-response search");
  packets->add_option("--profile", pargs.profile, "Packet profile JSON to simulate");
  packets->add_option("--max-rounds", pargs.max_rounds, "Best-response round cap");
  packets->add_option("--out", pargs.out, "Packet profile output (default: stdout)");
  packets->add_option("--outcome-csv", pargs.outcome_csv, "Per-hop packet timings");

  VerifyArgs vargs;
  auto* verify = app.add_subcommand("verify", "Load a strategy profile and measure it");
  verify->add_option("--instance", vargs.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--profile", vargs.profile, "Strategy profile JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--report", vargs.report, "Report JSON (default: stdout)");
  verify->add_option("--outcome-csv", vargs.outcome_csv, "Per-arc cumulative flows");
  verify->add_option("--theta-a", vargs.theta_a, "Start of the thin-flow residual window");
  verify->add_option("--theta-b", vargs.theta_b, "End of the thin-flow residual window");

  fot::SweepConfig sweep;
  std::string betas, sweep_instance;
  bool no_wall_time = false;
  std::string csv_out, summary_out, plot_out;
  auto* converge = app.add_subcommand("converge", "Packet-size sweep against the exact equilibrium");
  converge->add_option("--instance", sweep_instance, "Instance JSON")->required()->check(CLI::ExistingFile);
  converge->add_option("--betas", betas, "Comma-separated, strictly decreasing")->required();
  converge->add_option("--horizon", sweep.horizon, "Theta_max");
  converge->add_option("--grid", sweep.grid_step, "Grid step");
  converge->add_option("--max-rounds", sweep.max_rounds, "Best-response round cap");
  converge->add_option("--threads", sweep.threads, "Rows computed concurrently");
  converge->add_flag("--no-wall-time", no_wall_time, "Write wall_ms as 0");
  converge->add_option("--out", csv_out, "Sweep CSV")->required();
  converge->add_option("--summary", summary_out, "JSON summary");
  converge->add_option("--plot", plot_out, "Plot data for the smallest beta");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*nash) return run_nash(instance_path, horizon, out, profile_out);
    if (*thinflow) return run_thinflow(config_path, out, oracle);
    if (*packets) return run_packets(pargs);
    if (*verify) return run_verify(vargs);
    if (*converge) {
      sweep.instance_path = sweep_instance;
      sweep.betas = parse_betas(betas);
      sweep.record_wall_time = !no_wall_time;
      sweep.csv_path = csv_out;
      sweep.summary_path = summary_out;
      sweep.plot_path = plot_out;
      const auto result = fot::run_convergence_sweep(sweep);
      for (const auto& row : result.rows) {
        if (!row.detail.empty()) std::cerr << "beta " << row.beta << ": " << row.detail << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
