#include <gtest/gtest.h>

#include <cmath>

#include "fot/pwl.h"
#include "generators.h"

namespace fot {
namespace {

using Point = PiecewiseLinear::Point;

// Nondecreasing step-and-ramp function with a jump at 1.
PiecewiseLinear sample() {
  return PiecewiseLinear({{0, 0, 0}, {1, 1, 3}, {2, 3, 3}}, 0.0, 2.0);
}

TEST(PiecewiseLinear, EvaluatesRightContinuously) {
  const auto f = sample();
  EXPECT_DOUBLE_EQ(f(-1), 0.0);
  EXPECT_DOUBLE_EQ(f(0.5), 0.5);
  EXPECT_DOUBLE_EQ(f(1), 3.0);
  EXPECT_DOUBLE_EQ(f.left_limit(1), 1.0);
  EXPECT_DOUBLE_EQ(f(1.5), 3.0);
  EXPECT_DOUBLE_EQ(f(3), 5.0);
  EXPECT_DOUBLE_EQ(f.right_slope(0.5), 1.0);
  EXPECT_DOUBLE_EQ(f.right_slope(5), 2.0);
  EXPECT_TRUE(f.nondecreasing());
}

TEST(PiecewiseLinear, RejectsUnsortedBreakpoints) {
  EXPECT_THROW(PiecewiseLinear({{1, 0, 0}, {1, 0, 0}}, 0, 0), std::invalid_argument);
  EXPECT_THROW(PiecewiseLinear({}, 0, 0), std::invalid_argument);
}

TEST(PiecewiseLinear, LowerInverse) {
  const auto f = sample();
  EXPECT_DOUBLE_EQ(f.lower_inverse(0.5), 0.5);
  EXPECT_DOUBLE_EQ(f.lower_inverse(2.0), 1.0);  // inside the jump
  EXPECT_DOUBLE_EQ(f.lower_inverse(3.0), 1.0);
  EXPECT_DOUBLE_EQ(f.lower_inverse(4.0), 2.5);
  EXPECT_EQ(f.lower_inverse(-1.0), -INFINITY);
  EXPECT_EQ(PiecewiseLinear::constant(1).lower_inverse(2.0), INFINITY);
}

TEST(PiecewiseLinear, FromFunctionRecoversJumpsAndSlopes) {
  auto g = [](double x) { return x < 1 ? x : x + 2; };
  const auto f = PiecewiseLinear::from_function({0, 1}, g);
  EXPECT_DOUBLE_EQ(f.left_limit(1), 1.0);
  EXPECT_DOUBLE_EQ(f(1), 3.0);
  EXPECT_DOUBLE_EQ(f(-2), -2.0);
  EXPECT_DOUBLE_EQ(f(4), 6.0);
}

TEST(PiecewiseLinear, ComposeWithJumpInInner) {
  const auto outer = PiecewiseLinear({{0, 0, 0}, {2, 2, 2}}, 1.0, 3.0);  // slope 1 then 3
  const auto h = compose(outer, sample());
  EXPECT_DOUBLE_EQ(h(0.5), 0.5);
  EXPECT_DOUBLE_EQ(h(1), 2 + 3 * 1);
  EXPECT_DOUBLE_EQ(h.left_limit(1), 1.0);
  EXPECT_DOUBLE_EQ(h(3), 2 + 3 * 3);
}

TEST(PiecewiseLinear, PointwiseMinInsertsCrossings) {
  const auto a = PiecewiseLinear::identity();
  const auto b = PiecewiseLinear::constant(2.5);
  const auto m = pointwise_min(a, b);
  EXPECT_DOUBLE_EQ(m(1), 1.0);
  EXPECT_DOUBLE_EQ(m(2.5), 2.5);
  EXPECT_DOUBLE_EQ(m(7), 2.5);
  EXPECT_DOUBLE_EQ(m(-3), -3.0);
}

TEST(PiecewiseLinear, ShiftAndPlus) {
  const auto f = sample().shifted(1).plus(1);
  EXPECT_DOUBLE_EQ(f(2), 4.0);
  EXPECT_DOUBLE_EQ(f.left_limit(2), 2.0);
}

// Random nondecreasing right-continuous functions against direct sampling.
PiecewiseLinear random_monotone(testing::Rng& rng) {
  std::uniform_int_distribution<int> count(1, 6);
  std::vector<Point> pts;
  double x = testing::dyadic(rng, -2, 0, 4);
  double y = testing::dyadic(rng, -1, 1, 4);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const double left = y;
    y = left + testing::dyadic(rng, 0, 1, 4);  // jump
    pts.push_back({x, left, y});
    x += testing::dyadic(rng, 0.25, 2, 4);
    y += testing::dyadic(rng, 0, 2, 4);  // rise until the next breakpoint
  }
  // Make the left limits consistent with the rises.
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double rise = pts[i].left - pts[i - 1].value;
    if (rise < 0) pts[i].left = pts[i - 1].value;
    if (pts[i].value < pts[i].left) pts[i].value = pts[i].left;
  }
  return PiecewiseLinear(pts, testing::dyadic(rng, 0, 2, 4), testing::dyadic(rng, 0, 2, 4));
}

TEST(PiecewiseLinearProperty, ComposeAndMinMatchPointwiseEvaluation) {
  testing::Rng rng(17);
  std::uniform_real_distribution<double> xs(-4, 12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = random_monotone(rng);
    const auto g = random_monotone(rng);
    ASSERT_TRUE(f.nondecreasing());
    const auto fg = compose(f, g);
    const auto m = pointwise_min(f, g);
    const auto d = difference(f, g);
    for (int i = 0; i < 50; ++i) {
      const double x = xs(rng);
      EXPECT_NEAR(fg(x), f(g(x)), 1e-9);
      EXPECT_NEAR(m(x), std::min(f(x), g(x)), 1e-9);
      EXPECT_NEAR(d(x), f(x) - g(x), 1e-9);
      const double y = f(x);
      const double inv = f.lower_inverse(y);
      EXPECT_LE(inv, x + 1e-9);
      if (std::isinf(inv)) {
        // f >= y everywhere: the head is flat at or above y.
        EXPECT_EQ(f.head_slope(), 0.0);
        EXPECT_GE(f(x - 100.0) + 1e-9, y);
      } else {
        EXPECT_GE(f(inv) + 1e-9, y);
      }
    }
  }
}

}  // namespace
}  // namespace fot
