#include "fot/pwl.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fot {

PiecewiseLinear::PiecewiseLinear() : points_{{0.0, 0.0, 0.0}} {}

PiecewiseLinear::PiecewiseLinear(std::vector<Point> points, double head_slope,
                                 double tail_slope)
    : points_(std::move(points)), head_slope_(head_slope), tail_slope_(tail_slope) {
  if (points_.empty()) throw std::invalid_argument("piecewise-linear function needs a point");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].x > points_[i - 1].x)) {
      throw std::invalid_argument("breakpoints must be strictly increasing");
    }
  }
}

PiecewiseLinear PiecewiseLinear::identity() {
  return PiecewiseLinear({{0.0, 0.0, 0.0}}, 1.0, 1.0);
}

PiecewiseLinear PiecewiseLinear::constant(double c) {
  return PiecewiseLinear({{0.0, c, c}}, 0.0, 0.0);
}

PiecewiseLinear PiecewiseLinear::from_function(
    std::vector<double> xs, const std::function<double(double)>& f) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  xs.erase(std::remove_if(xs.begin(), xs.end(), [](double x) { return !std::isfinite(x); }),
           xs.end());
  if (xs.empty()) xs.push_back(0.0);

  auto slope_between = [&](double a, double b) {
    return (f(b) - f(a)) / (b - a);
  };
  const double head = slope_between(xs.front() - 1.0, xs.front() - 0.5);
  const double tail = slope_between(xs.back() + 0.5, xs.back() + 1.0);

  // Values are extrapolated from inside the segment to the right so that a
  // jump sitting exactly on a breakpoint is not lost to rounding in f.
  auto right_value = [&](std::size_t i) {
    const double x = xs[i];
    const double len = i + 1 < xs.size() ? xs[i + 1] - x : 1.0;
    const double a = x + 0.25 * len;
    const double b = x + 0.75 * len;
    if (!(b > a) || !(a > x)) return f(x);
    const double fa = f(a);
    return fa - (f(b) - fa) / (b - a) * (a - x);
  };

  std::vector<Point> pts;
  pts.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Point p{xs[i], 0.0, right_value(i)};
    if (i == 0) {
      p.left = f(xs[0] - 0.5) + head * 0.5;
    } else {
      const double len = xs[i] - xs[i - 1];
      const double a = xs[i - 1] + 0.25 * len;
      const double b = xs[i - 1] + 0.75 * len;
      if (b > a) {
        const double fb = f(b);
        p.left = fb + (fb - f(a)) / (b - a) * (xs[i] - b);
      } else {
        p.left = pts.back().value;
      }
    }
    pts.push_back(p);
  }
  return PiecewiseLinear(std::move(pts), head, tail);
}

std::size_t PiecewiseLinear::segment(double x) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double v, const Point& p) { return v < p.x; });
  if (it == points_.begin()) return points_.size();  // head region
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

double PiecewiseLinear::operator()(double x) const {
  const std::size_t i = segment(x);
  if (i == points_.size()) {
    return points_.front().left + head_slope_ * (x - points_.front().x);
  }
  const Point& p = points_[i];
  if (i + 1 == points_.size()) return p.value + tail_slope_ * (x - p.x);
  const Point& q = points_[i + 1];
  return p.value + (q.left - p.value) * ((x - p.x) / (q.x - p.x));
}

double PiecewiseLinear::left_limit(double x) const {
  const std::size_t i = segment(x);
  if (i != points_.size() && points_[i].x == x) return points_[i].left;
  return (*this)(x);
}

double PiecewiseLinear::right_slope(double x) const {
  const std::size_t i = segment(x);
  if (i == points_.size()) return head_slope_;
  if (i + 1 == points_.size()) return tail_slope_;
  const Point& p = points_[i];
  const Point& q = points_[i + 1];
  return (q.left - p.value) / (q.x - p.x);
}

std::vector<double> PiecewiseLinear::breakpoints() const {
  std::vector<double> xs;
  xs.reserve(points_.size());
  for (const auto& p : points_) xs.push_back(p.x);
  return xs;
}

bool PiecewiseLinear::nondecreasing(double tol) const {
  if (head_slope_ < -tol || tail_slope_ < -tol) return false;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].value < points_[i].left - tol) return false;
    if (i > 0 && points_[i].left < points_[i - 1].value - tol) return false;
  }
  return true;
}

PiecewiseLinear PiecewiseLinear::shifted(double dx) const {
  std::vector<Point> pts;
  pts.reserve(points_.size());
  for (const auto& p : points_) {
    Point q{p.x + dx, p.left, p.value};
    // Breakpoints a few ulps apart can coincide after the shift.
    if (!pts.empty() && !(q.x > pts.back().x)) {
      pts.back().value = q.value;
      continue;
    }
    pts.push_back(q);
  }
  return PiecewiseLinear(std::move(pts), head_slope_, tail_slope_);
}

PiecewiseLinear PiecewiseLinear::plus(double c) const {
  auto pts = points_;
  for (auto& p : pts) {
    p.left += c;
    p.value += c;
  }
  return PiecewiseLinear(std::move(pts), head_slope_, tail_slope_);
}

double PiecewiseLinear::lower_inverse(double y) const {
  const double inf = std::numeric_limits<double>::infinity();
  const Point& first = points_.front();
  if (y <= first.left) {
    if (head_slope_ > 0.0) return first.x - (first.left - y) / head_slope_;
    return -inf;
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point& p = points_[i];
    if (p.value >= y) return p.x;
    if (i + 1 < points_.size()) {
      const Point& q = points_[i + 1];
      if (q.left >= y) {
        return p.x + (y - p.value) / (q.left - p.value) * (q.x - p.x);
      }
    }
  }
  const Point& last = points_.back();
  if (tail_slope_ > 0.0) return last.x + (y - last.value) / tail_slope_;
  return inf;
}

namespace {

std::vector<double> merged_breakpoints(const PiecewiseLinear& a,
                                       const PiecewiseLinear& b) {
  auto xs = a.breakpoints();
  auto ys = b.breakpoints();
  xs.insert(xs.end(), ys.begin(), ys.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

PiecewiseLinear compose(const PiecewiseLinear& outer, const PiecewiseLinear& inner) {
  auto xs = inner.breakpoints();
  for (double y : outer.breakpoints()) {
    const double x = inner.lower_inverse(y);
    if (std::isfinite(x)) xs.push_back(x);
  }
  return PiecewiseLinear::from_function(
      std::move(xs), [&](double x) { return outer(inner(x)); });
}

PiecewiseLinear pointwise_min(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  auto xs = merged_breakpoints(a, b);
  std::vector<double> crossings;
  auto add_crossing = [&](double x0, double d0, double slope) {
    if (slope != 0.0) crossings.push_back(x0 - d0 / slope);
  };
  // Head and tail regions.
  {
    const double d0 = a.left_limit(xs.front()) - b.left_limit(xs.front());
    const double s = a.head_slope() - b.head_slope();
    if (s != 0.0 && d0 * s > 0.0) add_crossing(xs.front(), d0, s);
    const double d1 = a(xs.back()) - b(xs.back());
    const double t = a.tail_slope() - b.tail_slope();
    if (t != 0.0 && d1 * t < 0.0) add_crossing(xs.back(), d1, t);
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double d0 = a(xs[i]) - b(xs[i]);
    const double d1 = a.left_limit(xs[i + 1]) - b.left_limit(xs[i + 1]);
    if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
      crossings.push_back(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
    }
  }
  xs.insert(xs.end(), crossings.begin(), crossings.end());
  return PiecewiseLinear::from_function(
      std::move(xs), [&](double x) { return std::min(a(x), b(x)); });
}

PiecewiseLinear difference(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  return PiecewiseLinear::from_function(
      merged_breakpoints(a, b), [&](double x) { return a(x) - b(x); });
}

}  // namespace fot
