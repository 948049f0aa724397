#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "json.hpp"

#include "fot/harness.h"
#include "fot/io.h"
#include "fot/packets.h"
#include "generators.h"

namespace fot {
namespace {

Instance parallel4() { return load_instance(FOT_DATA_DIR "/parallel4.json"); }
Instance single_arc(double tau = 1.0) {
  return Instance({"s", "t"}, {{"e", "s", "t", tau, 1}}, "s", "t", 1);
}

Trajectory exact(const Instance& inst, double horizon = 12.0) {
  TrajectoryOptions opts;
  opts.horizon = horizon;
  return compute_trajectory(inst, GeneralizedSubnetwork::full(inst), empty_network_labels(inst),
                            opts);
}

SweepConfig small_sweep(std::vector<double> betas) {
  SweepConfig cfg;
  cfg.instance = parallel4();
  cfg.betas = std::move(betas);
  cfg.horizon = 10.0;
  cfg.grid_step = 0.05;
  cfg.record_wall_time = false;
  return cfg;
}

TEST(UniformGrid, IncludesEnd) {
  const auto g = uniform_grid(1.0, 0.1);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_DOUBLE_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 1.0, 1e-12);
}

TEST(SupDistance, ExactProfileAgainstItself) {
  const auto inst = parallel4();
  const auto traj = exact(inst, 20.0);
  const auto out = load_profile(inst, derive_exact_profile(traj, 12.0));
  EXPECT_LE(sup_distance(traj, out, uniform_grid(10.0, 0.01)), 1e-6);
}

TEST(SupDistance, ShiftedTransitTime) {
  const auto inst = single_arc(1.3);
  const auto out = load_profile(inst, {{{0}, EntryInterval{0, 12, 1}, {{}, {}}, ""}});
  EXPECT_NEAR(sup_distance(exact(single_arc(1.0)), out, uniform_grid(10.0, 0.01)), 0.3, 1e-9);
}

TEST(SupDistance, HorizonMismatch) {
  const auto inst = single_arc();
  const auto out = load_profile(inst, {{{0}, EntryInterval{0, 5, 1}, {{}, {}}, ""}});
  try {
    sup_distance(exact(inst), out, uniform_grid(10.0, 0.5));
    FAIL();
  } catch (const SweepError& e) {
    EXPECT_NE(std::string(e.what()).find("horizon mismatch"), std::string::npos);
  }
}

TEST(SweepConfig, Validation) {
  auto cfg = small_sweep({});
  EXPECT_THROW(cfg.validate(), SweepError);
  try {
    run_convergence_sweep(cfg);
    FAIL();
  } catch (const SweepError& e) {
    EXPECT_NE(std::string(e.what()).find("betas must be non-empty"), std::string::npos);
  }
  cfg.betas = {1.0, 0.0};
  EXPECT_THROW(cfg.validate(), SweepError);
  cfg.betas = {0.5, 1.0};
  EXPECT_THROW(cfg.validate(), SweepError);
  cfg.betas = {1.0, 0.5};
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Sweep, FiveRowsShrinkTowardsExact) {
  auto cfg = small_sweep({1.0, 0.5, 0.25, 0.125, 0.0625});
  cfg.threads = 2;
  const auto result = run_convergence_sweep(cfg);
  ASSERT_EQ(result.rows.size(), 5u);
  for (const auto& r : result.rows) {
    EXPECT_EQ(r.status, "converged") << r.beta << " " << r.detail;
    EXPECT_LE(r.best_response_residual, 1e-9);
    EXPECT_LE(r.epsilon, r.strict_delta + 1e-12);
    EXPECT_LE(r.strict_delta / r.beta, 4.0);
    EXPECT_GT(r.grid_error_bound, 0.0);
    EXPECT_EQ(r.wall_ms, 0.0);
  }
  EXPECT_LT(result.rows.back().sup_distance, result.rows.front().sup_distance);
  const auto slope = fitted_log_slope(result.rows);
  ASSERT_TRUE(slope.has_value());
  EXPECT_GT(*slope, 0.5);
  ASSERT_FALSE(result.plot.empty());
  EXPECT_EQ(result.plot_header.front(), "theta");
  EXPECT_EQ(result.plot.front().size(), result.plot_header.size());
}

TEST(Sweep, DeterministicCsv) {
  const auto a = run_convergence_sweep(small_sweep({1.0, 0.5}));
  auto cfg = small_sweep({1.0, 0.5});
  cfg.threads = 2;
  const auto b = run_convergence_sweep(cfg);
  EXPECT_EQ(sweep_csv(a.rows), sweep_csv(b.rows));
  EXPECT_EQ(sweep_csv(a.rows).substr(0, 49),
            "beta,epsilon,strict_delta,sup_distance,status,wal");
}

TEST(Sweep, SingleRowHasNoSlope) {
  const auto result = run_convergence_sweep(small_sweep({0.5}));
  EXPECT_FALSE(fitted_log_slope(result.rows).has_value());
  const auto summary = nlohmann::json::parse(sweep_summary_json(result.rows));
  EXPECT_EQ(summary["log_log_slope"], "not-available");
}

TEST(Sweep, NonConvergenceIsReported) {
  auto cfg = small_sweep({1.0});
  cfg.max_rounds = 0;
  const auto result = run_convergence_sweep(cfg);
  EXPECT_EQ(result.rows.front().status, "packet_eq_not_converged");
  EXPECT_TRUE(std::isfinite(result.rows.front().sup_distance));
}

TEST(Sweep, SingleArcDeltaIsTwoBetaOverAllAgents) {
  // The first packet's agents compare against the empty-arc label, which
  // doubles the measured values; from the second packet on they equal beta.
  for (double beta : {1.0, 0.25}) {
    SweepConfig cfg;
    cfg.instance = single_arc();
    cfg.betas = {beta};
    cfg.horizon = 10.0;
    cfg.grid_step = 0.05;
    cfg.record_wall_time = false;
    const auto row = run_convergence_sweep(cfg).rows.front();
    EXPECT_NEAR(row.epsilon, 2 * beta, 1e-9);
    EXPECT_NEAR(row.strict_delta, 2 * beta, 1e-9);

    const PacketInstance pinst{single_arc(), beta, row.packet_count};
    PacketProfile prof;
    prof.paths.assign(row.packet_count, {0});
    const auto out = load_profile(pinst.base,
                                  embed_packets(pinst, prof, simulate_packets(pinst, prof)));
    const MeasureWindow later{beta, 10.0};
    EXPECT_NEAR(measure_strict_delta(pinst.base, out, later), beta, 1e-9);
  }
}

TEST(Report, ExportWritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "fot_harness_test";
  std::filesystem::create_directories(dir);
  const auto result = run_convergence_sweep(small_sweep({1.0, 0.5}));
  export_report(result.rows, {dir / "s.csv", dir / "s.json", dir / "p.csv"}, &result);
  EXPECT_EQ(read_text_file(dir / "s.csv"), sweep_csv(result.rows));
  const auto summary = nlohmann::json::parse(read_text_file(dir / "s.json"));
  EXPECT_EQ(summary["rows"].size(), 2u);
  EXPECT_TRUE(summary["epsilon_le_delta"].get<bool>());
  EXPECT_TRUE(std::filesystem::exists(dir / "p.csv"));
  EXPECT_THROW(export_report({}, {dir / "x.csv", dir / "x.json", {}}), SweepError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace fot
