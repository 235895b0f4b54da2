#pragma once

// Shared fixtures for the unit and acceptance tests: synthetic planner views,
// random LPs and a brute-force vertex enumerator used as an LP oracle.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "surge/cost.hpp"
#include "surge/simplex.hpp"
#include "surge/staffing.hpp"

namespace surge::testing {

inline std::string source_path(const std::string& rel) {
  return std::string(SURGE_SOURCE_DIR) + "/" + rel;
}

/// Regular staff 800..1200, hazard up to 0.05, latent stay exp(-1/1.9).
inline PlannerView random_view(std::mt19937& rng, int days) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlannerView v;
  v.latent_stay = std::exp(-1.0 / 1.9);
  for (int t = 0; t < days; ++t) {
    v.regular_staff.push_back(800.0 + 400.0 * u(rng));
    v.surge_hazard.push_back(0.05 * u(rng));
    v.general_infectives.push_back(1000.0 * u(rng));
  }
  return v;
}

/// Three pieces: free above ~1000-1200 staff, steeper below.
inline DayCost random_threshold_cost(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PiecewiseLinearConvex f;
  f.pieces = {{0.0, 0.0}, {-0.002, 2.0 + u(rng)}, {-0.005, 5.5 + u(rng)}};
  return threshold_cost_fn(f);
}

inline DeploymentVector random_deployment(std::mt19937& rng, int days, double scale) {
  std::uniform_real_distribution<double> u(0.0, scale);
  DeploymentVector h(static_cast<std::size_t>(days));
  for (int s = 0; s < days; ++s) h[static_cast<std::size_t>(s)] = u(rng);
  return h;
}

/// Small mixed LP: >= and <= rows, an optional equality row, finite upper
/// bounds on some variables and a box row so the optimum (if any) is finite.
inline LinearProgram random_lp(std::mt19937& rng, int n, int m, bool with_eq) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  LinearProgram lp(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) lp.cost[static_cast<std::size_t>(j)] = u(rng);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    for (auto& a : row) a = u(rng);
    const double rhs = u(rng);
    if (pos(rng) < 0.5) lp.add_ge(row, rhs);
    else lp.add_le(row, rhs + 1.0);
  }
  if (with_eq) {
    for (auto& a : row) a = pos(rng);
    lp.add_eq(row, 0.5 + pos(rng));
  }
  std::fill(row.begin(), row.end(), 1.0);
  lp.add_le(row, 3.0 * n);
  lp.upper.assign(static_cast<std::size_t>(n), std::nullopt);
  for (int j = 0; j < n; ++j) {
    if (pos(rng) < 0.5) lp.upper[static_cast<std::size_t>(j)] = 1.0 + 2.0 * pos(rng);
  }
  return lp;
}

/// Solves the square system M x = r by partial pivoting; nullopt if singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    }
    if (std::abs(m[piv][k]) < 1e-11) return std::nullopt;
    std::swap(m[k], m[piv]);
    std::swap(r[k], r[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i][k] / m[k][k];
      for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
      r[i] -= f * r[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = r[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= m[k][j] * x[j];
    x[k] = s / m[k][k];
  }
  return x;
}

/// Minimum of c.x over the vertices of the (bounded) feasible region, or
/// nullopt when no vertex is feasible. Exponential; tiny LPs only.
inline std::optional<double> vertex_enumeration_optimum(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  // Every constraint as a.x >= b; equalities are always active.
  struct Row {
    std::vector<double> a;
    double b;
  };
  std::vector<Row> eq, ineq;
  for (std::size_t i = 0; i < lp.eq_rhs.size(); ++i) {
    auto r = lp.eq_matrix.row(i);
    eq.push_back({{r.begin(), r.end()}, lp.eq_rhs[i]});
  }
  for (std::size_t i = 0; i < lp.ge_rhs.size(); ++i) {
    auto r = lp.ge_matrix.row(i);
    ineq.push_back({{r.begin(), r.end()}, lp.ge_rhs[i]});
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    ineq.push_back({e, lp.lower.empty() ? 0.0 : lp.lower[j]});
    if (!lp.upper.empty() && lp.upper[j]) {
      e[j] = -1.0;
      ineq.push_back({e, -*lp.upper[j]});
    }
  }
  const std::size_t pick = n - eq.size();
  std::optional<double> best;
  std::vector<bool> mask(ineq.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(pick), true);
  // prev_permutation over a sorted-descending mask walks every combination.
  do {
    std::vector<std::vector<double>> m;
    std::vector<double> r;
    for (const auto& row : eq) {
      m.push_back(row.a);
      r.push_back(row.b);
    }
    for (std::size_t i = 0; i < ineq.size(); ++i) {
      if (mask[i]) {
        m.push_back(ineq[i].a);
        r.push_back(ineq[i].b);
      }
    }
    const auto x = solve_square(m, r);
    if (!x) continue;
    bool feasible = true;
    auto dot = [&](const std::vector<double>& a) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a[j] * (*x)[j];
      return s;
    };
    for (const auto& row : eq) feasible = feasible && std::abs(dot(row.a) - row.b) <= 1e-9;
    for (const auto& row : ineq) feasible = feasible && dot(row.a) >= row.b - 1e-9;
    if (!feasible) continue;
    const double obj = dot(lp.cost);
    if (!best || obj < *best) best = obj;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

/// Largest violation of primal feasibility, dual feasibility, complementary
/// slackness and the duality identity c.x = b.y + sum_j r_j x_j.
inline double kkt_residual(const LinearProgram& lp, const LpSolution& sol) {
  const std::size_t n = lp.num_vars();
  double worst = 0.0;
  double dual_obj = 0.0;
  for (std::size_t i = 0; i < lp.eq_rhs.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += lp.eq_matrix(i, j) * sol.x[j];
    worst = std::max(worst, std::abs(s - lp.eq_rhs[i]));
    dual_obj += lp.eq_rhs[i] * sol.eq_duals[i];
  }
  for (std::size_t i = 0; i < lp.ge_rhs.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += lp.ge_matrix(i, j) * sol.x[j];
    const double slack = s - lp.ge_rhs[i];
    const double y = sol.ge_duals[i];
    worst = std::max({worst, -slack, -y, std::abs(y * slack)});
    dual_obj += lp.ge_rhs[i] * y;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double r = lp.cost[j];
    for (std::size_t i = 0; i < lp.eq_rhs.size(); ++i) r -= lp.eq_matrix(i, j) * sol.eq_duals[i];
    for (std::size_t i = 0; i < lp.ge_rhs.size(); ++i) r -= lp.ge_matrix(i, j) * sol.ge_duals[i];
    const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
    const std::optional<double> hi = lp.upper.empty() ? std::nullopt : lp.upper[j];
    const double x = sol.x[j];
    worst = std::max(worst, lo - x);
    if (hi) worst = std::max(worst, x - *hi);
    const bool at_lo = x <= lo + 1e-9;
    const bool at_hi = hi && x >= *hi - 1e-9;
    if (!at_lo) worst = std::max(worst, r);   // r <= 0 unless at the lower bound
    if (!at_hi) worst = std::max(worst, -r);  // r >= 0 unless at the upper bound
    dual_obj += r * x;
  }
  return std::max(worst, std::abs(dual_obj - sol.objective));
}

}  // namespace surge::testing
