#include "simplex.h"

#include <cmath>
#include <limits>

namespace fot::detail {

std::optional<std::vector<double>> find_feasible_point(
    const FeasibilityProblem& lp, double tol) {
  const std::size_t n = lp.num_vars;
  const std::size_t m_eq = lp.eq.size();
  const std::size_t m_le = lp.le.size();
  const std::size_t m = m_eq + m_le;
  // Columns: original vars, slacks (one per <= row), artificials (one per
  // row), rhs.
  const std::size_t slack0 = n;
  const std::size_t art0 = n + m_le;
  const std::size_t cols = art0 + m + 1;
  const std::size_t rhs = cols - 1;

  std::vector<std::vector<double>> tab(m + 1, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(m);

  for (std::size_t i = 0; i < m; ++i) {
    auto& row = tab[i];
    double b;
    if (i < m_eq) {
      for (std::size_t j = 0; j < n; ++j) row[j] = lp.eq[i][j];
      b = lp.eq_rhs[i];
    } else {
      const std::size_t k = i - m_eq;
      for (std::size_t j = 0; j < n; ++j) row[j] = lp.le[k][j];
      row[slack0 + k] = 1.0;
      b = lp.le_rhs[k];
    }
    if (b < 0.0) {
      for (std::size_t j = 0; j < art0; ++j) row[j] = -row[j];
      b = -b;
    }
    row[art0 + i] = 1.0;
    row[rhs] = b;
    basis[i] = art0 + i;
  }

  // Objective row holds reduced costs of "minimize sum of artificials".
  auto& obj = tab[m];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < art0; ++j) obj[j] -= tab[i][j];
    obj[rhs] -= tab[i][rhs];
  }

  const double eps = 1e-12;
  const std::size_t max_pivots = 50 * (cols + m) + 1000;
  for (std::size_t iter = 0; iter < max_pivots; ++iter) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < rhs; ++j) {
      if (obj[j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (tab[i][enter] > eps) {
        const double ratio = tab[i][rhs] / tab[i][enter];
        if (ratio < best - eps ||
            (ratio <= best + eps && leave < m && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave == m) break;  // unbounded direction; cannot happen in phase I

    const double piv = tab[leave][enter];
    for (double& v : tab[leave]) v /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = tab[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) tab[i][j] -= f * tab[leave][j];
    }
    basis[leave] = enter;
  }

  if (-obj[rhs] > tol) return std::nullopt;
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) x[basis[i]] = std::max(0.0, tab[i][rhs]);
  }
  return x;
}

}  // namespace fot::detail
