#pragma once

#include <functional>
#include <vector>

namespace fot {

/// Piecewise-linear real function with finitely many breakpoints and jumps.
/// At each breakpoint x the function has a left limit and a (right-continuous)
/// value. Between breakpoints it interpolates linearly from the value at the
/// left breakpoint to the left limit at the right one; outside the first and
/// last breakpoint it continues with `head_slope` / `tail_slope`.
class PiecewiseLinear {
 public:
  struct Point {
    double x = 0.0;
    double left = 0.0;
    double value = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
  };

  /// The zero function.
  PiecewiseLinear();
  PiecewiseLinear(std::vector<Point> points, double head_slope, double tail_slope);

  static PiecewiseLinear identity();
  static PiecewiseLinear constant(double c);

  /// Samples a function that is affine between consecutive entries of `xs`
  /// (right-continuous at each of them). Left limits and the outer slopes are
  /// recovered by extrapolating from interior sample points.
  static PiecewiseLinear from_function(std::vector<double> xs,
                                       const std::function<double(double)>& f);

  double operator()(double x) const;
  double left_limit(double x) const;
  /// Slope immediately to the right of x.
  double right_slope(double x) const;

  const std::vector<Point>& points() const { return points_; }
  double head_slope() const { return head_slope_; }
  double tail_slope() const { return tail_slope_; }
  std::vector<double> breakpoints() const;

  bool nondecreasing(double tol = 0.0) const;

  PiecewiseLinear shifted(double dx) const;  // x -> f(x - dx)
  PiecewiseLinear plus(double c) const;

  /// Smallest x with f(x) >= y for nondecreasing right-continuous f;
  /// +infinity when no such x exists and -infinity when f(x) >= y everywhere.
  double lower_inverse(double y) const;

  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;

 private:
  std::size_t segment(double x) const;  // index of last point with point.x <= x

  std::vector<Point> points_;
  double head_slope_ = 0.0;
  double tail_slope_ = 0.0;
};

/// outer(inner(x)); inner must be nondecreasing and right-continuous.
PiecewiseLinear compose(const PiecewiseLinear& outer, const PiecewiseLinear& inner);

/// Pointwise minimum, with crossing points inserted as breakpoints.
PiecewiseLinear pointwise_min(const PiecewiseLinear& a, const PiecewiseLinear& b);

/// a - b.
PiecewiseLinear difference(const PiecewiseLinear& a, const PiecewiseLinear& b);

}  // namespace fot
