#include <gtest/gtest.h>

#include <cmath>

#include "fot/harness.h"
#include "fot/io.h"
#include "fot/loading.h"
#include "fot/trajectory.h"
#include "generators.h"
#include "oracles.h"

namespace fot {
namespace {

Instance parallel4() { return load_instance(FOT_DATA_DIR "/parallel4.json"); }

Trajectory parallel4_trajectory(std::optional<double> horizon = {}) {
  const auto inst = parallel4();
  TrajectoryOptions opts;
  opts.horizon = horizon;
  return compute_trajectory(inst, GeneralizedSubnetwork::full(inst), empty_network_labels(inst),
                            opts);
}

TEST(Trajectory, Parallel4Golden) {
  // Reference values from the closed-form parallel-arc stepping.
  const auto ref = testing::parallel_trajectory({3, 5, 7, 9}, {1, 1, 1, 1}, 3, 100);
  ASSERT_EQ(ref.size(), 3u);
  const auto traj = parallel4_trajectory();
  ASSERT_EQ(traj.phases().size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto& ph = traj.phases()[i];
    EXPECT_NEAR(ph.theta_start, ref[i].theta_start, 1e-9);
    EXPECT_NEAR(ph.label_start[1], ref[i].label_start, 1e-9);
    EXPECT_NEAR(ph.direction[1], ref[i].slope, 1e-9);
    EXPECT_EQ(ph.direction[0], 1.0);
  }
  EXPECT_NEAR(ref[1].theta_start, 1.0, 1e-12);
  EXPECT_NEAR(ref[2].theta_start, 5.0, 1e-12);
  EXPECT_TRUE(traj.phases().back().infinite());
  for (const auto& ph : traj.phases()) EXPECT_FALSE(ph.config.active.contains(3));
}

TEST(Trajectory, SingleArcWithSpareCapacity) {
  const Instance one({"s", "t"}, {{"e", "s", "t", 1, 2}}, "s", "t", 1);
  const auto traj = compute_trajectory(one, GeneralizedSubnetwork::full(one),
                                       empty_network_labels(one));
  ASSERT_EQ(traj.phases().size(), 1u);
  EXPECT_TRUE(traj.phases()[0].infinite());
  EXPECT_EQ(traj.phases()[0].direction[1], 1.0);
  const auto ss = steady_state_info(traj);
  EXPECT_TRUE(ss.reached);
  EXPECT_EQ(ss.t_ss, 0.0);
}

TEST(Trajectory, RestrictedSubnetwork) {
  const auto inst = parallel4();
  GeneralizedSubnetwork sub{ArcSet::of(inst, {"e1", "e2"}), ArcSet(4)};
  const auto traj = compute_trajectory(inst, sub, empty_network_labels(inst));
  ASSERT_EQ(traj.phases().size(), 2u);
  EXPECT_NEAR(traj.phases()[0].direction[1], 3.0, 1e-12);
  EXPECT_NEAR(traj.phases()[1].theta_start, 1.0, 1e-12);
  EXPECT_NEAR(traj.phases()[1].direction[1], 1.5, 1e-12);
  EXPECT_TRUE(traj.phases()[1].infinite());
}

TEST(Trajectory, Evaluate) {
  const auto traj = parallel4_trajectory();
  auto l = evaluate_trajectory(traj, 0.5);
  EXPECT_NEAR(l[0], 0.5, 1e-12);
  EXPECT_NEAR(l[1], 4.5, 1e-12);
  l = evaluate_trajectory(traj, 1.0);
  EXPECT_NEAR(l[1], 6.0, 1e-12);
  l = evaluate_trajectory(traj, 9.0);
  EXPECT_NEAR(l[1], 16.0, 1e-12);
}

TEST(Trajectory, EvaluateBeyondHorizonThrows) {
  const auto traj = parallel4_trajectory(3.0);
  EXPECT_FALSE(traj.phases().back().infinite());
  EXPECT_THROW(evaluate_trajectory(traj, 4.0), TrajectoryError);
}

TEST(SteadyState, Parallel4) {
  const auto ss = steady_state_info(parallel4_trajectory());
  EXPECT_TRUE(ss.reached);
  EXPECT_NEAR(ss.t_ss, 5.0, 1e-12);
  EXPECT_NEAR(ss.lambda_ss[1], 1.0, 1e-12);
  EXPECT_TRUE(ss.violations.empty());
  EXPECT_FALSE(steady_state_info(parallel4_trajectory(3.0)).reached);
}

TEST(ExactProfile, Parallel4Classes) {
  const auto traj = parallel4_trajectory();
  const auto profile = derive_exact_profile(traj, 10.0);
  ASSERT_EQ(profile.size(), 6u);
  auto check = [&](std::size_t i, const char* arc, double a, double b, double rate) {
    const auto& c = profile[i];
    ASSERT_EQ(c.path.size(), 1u);
    EXPECT_EQ(traj.instance().arc(c.path[0]).id, arc);
    const auto& iv = std::get<EntryInterval>(c.entry);
    EXPECT_NEAR(iv.start, a, 1e-12);
    EXPECT_NEAR(iv.end, b, 1e-12);
    EXPECT_NEAR(iv.rate, rate, 1e-12);
    for (const auto& w : c.waiting) {
      EXPECT_EQ(w.offset, 0.0);
      EXPECT_EQ(w.slope, 0.0);
    }
  };
  check(0, "e1", 0, 1, 3);
  check(1, "e1", 1, 5, 1.5);
  check(2, "e2", 1, 5, 1.5);
  check(3, "e1", 5, 10, 1);
  check(4, "e2", 5, 10, 1);
  check(5, "e3", 5, 10, 1);
}

TEST(ProjectToValid, Examples) {
  const auto inst = parallel4();
  const LabelVector l(std::vector<double>{5, 12});
  EXPECT_EQ(project_to_valid(inst, l), l);
  const Instance path({"s", "v", "t"}, {{"sv", "s", "v", 1, 1}, {"vt", "v", "t", 1, 1}}, "s", "t", 1);
  const auto p = project_to_valid(path, LabelVector(std::vector<double>{0, 2, 2.5}));
  EXPECT_NEAR(p[0], 0.0, 1e-12);
  EXPECT_NEAR(p[1], 1.5, 1e-12);
  EXPECT_NEAR(p[2], 2.5, 1e-12);
}

TEST(ProjectToValidProperty, LowersLabelsOntoValidSet) {
  testing::Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = testing::random_instance(rng, 6, 10);
    const auto l = testing::random_bellman_labels(rng, inst);
    double deficit = 0.0;
    for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
      deficit = std::max(deficit, arc_slack(inst, l, e));
    }
    const auto p = project_to_valid(inst, l);
    const auto cfg = classify_configuration(inst, p, GeneralizedSubnetwork::full(inst));
    // Resetting arcs must reach the sink in the active network.
    const auto r = is_valid_configuration(inst, cfg);
    for (const auto& w : r.witnesses) EXPECT_EQ(w.find("on no active s-t path"), std::string::npos) << w;
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      EXPECT_LE(p[v], l[v] + 1e-12);
      EXPECT_GE(p[v], l[v] - static_cast<double>(inst.num_nodes()) * deficit - 1e-9);
    }
    EXPECT_EQ(project_to_valid(inst, p), p);
  }
}

TEST(TrajectoryProperty, RandomInstancesInvariants) {
  testing::Rng rng(43);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = testing::random_instance(rng, 5, 8);
    const auto traj = compute_trajectory(inst, GeneralizedSubnetwork::full(inst),
                                         empty_network_labels(inst));
    const auto& phases = traj.phases();
    for (std::size_t i = 0; i < phases.size(); ++i) {
      const auto& ph = phases[i];
      EXPECT_EQ(ph.direction[inst.source()], 1.0);
      EXPECT_EQ(ph.direction, ph.flow.lambda);
      EXPECT_TRUE(check_thin_flow(inst, ph.config, ph.flow).passes(1e-9));
      if (i + 1 < phases.size()) {
        EXPECT_GE(ph.theta_end, ph.theta_start);
        EXPECT_EQ(phases[i + 1].theta_start, ph.theta_end);
        const auto end = ph.at(ph.theta_end);
        EXPECT_LE(distance_inf(end, phases[i + 1].label_start), 1e-9);
        // An event happened: some arc sits on its hyperplane.
        bool hit = false;
        for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
          hit = hit || std::abs(arc_slack(inst, end, e)) <= 1e-9 * std::max(1.0, std::abs(end[inst.arc(e).head]));
        }
        EXPECT_TRUE(hit);
      }
      // Interior configuration is constant within the phase.
      if (ph.theta_end > ph.theta_start) {
        const double mid = ph.infinite() ? ph.theta_start + 1.0
                                         : 0.5 * (ph.theta_start + ph.theta_end);
        EXPECT_EQ(classify_configuration(inst, ph.at(mid), traj.subnetwork()), ph.config);
      }
    }
    // kappa-Lipschitz on a grid.
    const double end = std::min(traj.end(), 20.0);
    const auto grid = uniform_grid(end, end / 50.0);
    for (std::size_t a = 0; a + 1 < grid.size(); ++a) {
      const auto la = evaluate_trajectory(traj, grid[a]);
      const auto lb = evaluate_trajectory(traj, grid[a + 1]);
      EXPECT_LE(distance_inf(la, lb), inst.kappa() * (grid[a + 1] - grid[a]) + 1e-9);
    }
    const auto ss = steady_state_info(traj);
    if (ss.reached) {
      EXPECT_TRUE(ss.violations.empty());
    }
  }
}

TEST(TrajectoryProperty, QueueDelayContinuousAcrossPhases) {
  const auto traj = parallel4_trajectory();
  const auto& inst = traj.instance();
  for (std::size_t i = 0; i + 1 < traj.phases().size(); ++i) {
    const auto& a = traj.phases()[i];
    const auto& b = traj.phases()[i + 1];
    for (std::size_t e = 0; e < inst.num_arcs(); ++e) {
      EXPECT_NEAR(std::max(0.0, arc_slack(inst, a.at(a.theta_end), e)),
                  std::max(0.0, arc_slack(inst, b.label_start, e)), 1e-9);
    }
  }
}

TEST(TrajectoryProperty, ContinuityInTheStartingPoint) {
  const auto inst = parallel4();
  const auto full = GeneralizedSubnetwork::full(inst);
  const auto a = compute_trajectory(inst, full, LabelVector(std::vector<double>{0, 3}));
  const auto b = compute_trajectory(inst, full, LabelVector(std::vector<double>{0, 3 + 1e-3}));
  for (double theta : uniform_grid(10.0, 0.01)) {
    EXPECT_LE(distance_inf(evaluate_trajectory(a, theta), evaluate_trajectory(b, theta)), 1e-2);
  }
}

TEST(TrajectoryProperty, ExactProfileRoundTrip) {
  testing::Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing::random_instance(rng, 4, 6, false);
    TrajectoryOptions opts;
    opts.horizon = 12.0;
    const auto traj = compute_trajectory(inst, GeneralizedSubnetwork::full(inst),
                                         empty_network_labels(inst), opts);
    const double until = std::min(traj.end(), 12.0);
    const auto out = load_profile(inst, derive_exact_profile(traj, until));
    EXPECT_LE(measure_strict_delta(inst, out), 1e-6);
    EXPECT_LE(sup_distance(traj, out, uniform_grid(until, until / 100.0)), 1e-6);
  }
}

TEST(Trajectory, RejectsInvalidStart) {
  const Instance path({"s", "v", "t"}, {{"sv", "s", "v", 1, 1}, {"vt", "v", "t", 1, 1}}, "s", "t", 1);
  EXPECT_THROW(compute_trajectory(path, GeneralizedSubnetwork::full(path), LabelVector(std::vector<double>{0, 2, 2.5})),
               std::exception);
}

}  // namespace
}  // namespace fot
