#include "surge/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace surge {

void Matrix::add_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw LpError("row length does not match matrix width");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

std::span<double> Matrix::add_zero_row() {
  data_.resize(data_.size() + cols_, 0.0);
  ++rows_;
  return row(rows_ - 1);
}

void Matrix::set_cols(std::size_t cols) {
  if (rows_ != 0) throw LpError("cannot resize a non-empty matrix");
  cols_ = cols;
}

LinearProgram::LinearProgram(std::size_t num_vars) : cost(num_vars, 0.0) {
  eq_matrix.set_cols(num_vars);
  ge_matrix.set_cols(num_vars);
}

void LinearProgram::add_ge(std::span<const double> a, double rhs) {
  ge_matrix.add_row(a);
  ge_rhs.push_back(rhs);
}

void LinearProgram::add_le(std::span<const double> a, double rhs) {
  std::span<double> r = ge_matrix.add_zero_row();
  if (a.size() != r.size()) throw LpError("row length does not match matrix width");
  for (std::size_t j = 0; j < a.size(); ++j) r[j] = -a[j];
  ge_rhs.push_back(-rhs);
}

void LinearProgram::add_eq(std::span<const double> a, double rhs) {
  eq_matrix.add_row(a);
  eq_rhs.push_back(rhs);
}

void LinearProgram::validate() const {
  const std::size_t n = num_vars();
  auto finite = [](double v) { return std::isfinite(v); };
  if (eq_matrix.rows() > 0 && eq_matrix.cols() != n) throw LpError("equality matrix width mismatch");
  if (ge_matrix.rows() > 0 && ge_matrix.cols() != n) throw LpError("inequality matrix width mismatch");
  if (eq_rhs.size() != eq_matrix.rows()) throw LpError("equality rhs length mismatch");
  if (ge_rhs.size() != ge_matrix.rows()) throw LpError("inequality rhs length mismatch");
  if (!lower.empty() && lower.size() != n) throw LpError("lower bound length mismatch");
  if (!upper.empty() && upper.size() != n) throw LpError("upper bound length mismatch");
  if (!std::all_of(cost.begin(), cost.end(), finite)) throw LpError("non-finite cost");
  if (!std::all_of(eq_rhs.begin(), eq_rhs.end(), finite) ||
      !std::all_of(ge_rhs.begin(), ge_rhs.end(), finite)) {
    throw LpError("non-finite right-hand side");
  }
  for (std::size_t i = 0; i < eq_matrix.rows(); ++i) {
    auto r = eq_matrix.row(i);
    if (!std::all_of(r.begin(), r.end(), finite)) throw LpError("non-finite matrix entry");
  }
  for (std::size_t i = 0; i < ge_matrix.rows(); ++i) {
    auto r = ge_matrix.row(i);
    if (!std::all_of(r.begin(), r.end(), finite)) throw LpError("non-finite matrix entry");
  }
  if (!std::all_of(lower.begin(), lower.end(), finite)) throw LpError("non-finite lower bound");
  for (std::size_t j = 0; j < upper.size(); ++j) {
    if (upper[j] && (!std::isfinite(*upper[j]) || *upper[j] < (lower.empty() ? 0.0 : lower[j]))) {
      throw LpError("upper bound below lower bound or non-finite");
    }
  }
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

enum class Outcome { kOptimal, kUnbounded, kInfeasible, kLimit };

// Dictionary:  x_B(i) = rhs_i - sum_j T(i, j) x_N(j),   obj = obj0 + sum_j d_j x_N(j).
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_(rows * cols, 0.0), rhs_(rows, 0.0), d_(cols, 0.0),
        basis_(rows, -1), col_(cols, -1), barred_(cols, 0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * n_ + j]; }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  std::vector<double>& rhs() { return rhs_; }
  std::vector<double>& d() { return d_; }
  double& obj0() { return obj0_; }
  std::vector<int>& basis() { return basis_; }
  std::vector<int>& col() { return col_; }
  std::vector<char>& barred() { return barred_; }
  long pivots() const { return pivots_; }

  /// Called every `refresh_every` pivots to rebuild the dictionary from the
  /// original data and stop roundoff from accumulating.
  std::function<void()> refresh;
  long refresh_every = 100;

  void pivot(std::size_t r, std::size_t q) {
    double* pr = &t_[r * n_];
    const double piv = pr[q];
    const double inv = 1.0 / piv;
    nz_.clear();
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == q) continue;
      if (pr[j] != 0.0) {
        pr[j] *= inv;
        nz_.push_back(j);
      }
    }
    pr[q] = inv;
    rhs_[r] *= inv;

    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * n_];
      const double f = pi[q];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) pi[j] -= f * pr[j];
      pi[q] = -f * inv;
      rhs_[i] -= f * rhs_[r];
    }
    const double dq = d_[q];
    if (dq != 0.0) {
      for (std::size_t j : nz_) d_[j] -= dq * pr[j];
      d_[q] = -dq * inv;
      obj0_ += dq * rhs_[r];
    }
    std::swap(basis_[r], col_[q]);
    ++pivots_;
    if (refresh && pivots_ % refresh_every == 0) refresh();
  }

  Outcome primal(const SimplexOptions& opt, long& budget) {
    int degenerate = 0;
    while (true) {
      if (budget-- <= 0) return Outcome::kLimit;
      const bool bland = degenerate >= opt.degenerate_switch;
      std::size_t q = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (barred_[j] || d_[j] >= -opt.optimality_tolerance) continue;
        if (q == n_) {
          q = j;
        } else if (bland) {
          if (col_[j] < col_[q]) q = j;
        } else if (d_[j] < d_[q] || (d_[j] == d_[q] && col_[j] < col_[q])) {
          q = j;
        }
      }
      if (q == n_) return Outcome::kOptimal;

      std::size_t r = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, q);
        if (a <= opt.pivot_tolerance) continue;
        const double ratio = std::max(rhs_[i], 0.0) / a;
        const double slack = 1e-12 * (1.0 + std::abs(best));
        // Near-ties go to the larger pivot element, or the lower index under Bland.
        const bool tie = r < m_ && ratio <= best + slack;
        const bool wins_tie = bland ? basis_[i] < basis_[r] : a > at(r, q) || (a == at(r, q) && basis_[i] < basis_[r]);
        if (r == m_ || ratio < best - slack || (tie && wins_tie)) {
          r = i;
          best = std::min(best, ratio);
        }
      }
      if (r == m_) return Outcome::kUnbounded;
      degenerate = best <= 1e-12 ? degenerate + 1 : 0;
      pivot(r, q);
    }
  }

  Outcome dual(const SimplexOptions& opt, long& budget) {
    int degenerate = 0;
    while (true) {
      if (budget-- <= 0) return Outcome::kLimit;
      const bool bland = degenerate >= opt.degenerate_switch;
      std::size_t r = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (rhs_[i] >= -opt.feasibility_tolerance) continue;
        if (r == m_) {
          r = i;
        } else if (bland) {
          if (basis_[i] < basis_[r]) r = i;
        } else if (rhs_[i] < rhs_[r] || (rhs_[i] == rhs_[r] && basis_[i] < basis_[r])) {
          r = i;
        }
      }
      if (r == m_) return Outcome::kOptimal;

      std::size_t q = n_;
      double best = std::numeric_limits<double>::infinity();
      const double* pr = &t_[r * n_];
      for (std::size_t j = 0; j < n_; ++j) {
        if (barred_[j]) continue;
        const double a = pr[j];
        if (a >= -opt.pivot_tolerance) continue;
        const double ratio = std::max(d_[j], 0.0) / -a;
        const double slack = 1e-12 * (1.0 + std::abs(best));
        const bool tie = q < n_ && ratio <= best + slack;
        const bool wins_tie = bland ? col_[j] < col_[q] : a < pr[q] || (a == pr[q] && col_[j] < col_[q]);
        if (q == n_ || ratio < best - slack || (tie && wins_tie)) {
          q = j;
          best = std::min(best, ratio);
        }
      }
      if (q == n_) return Outcome::kInfeasible;
      degenerate = best <= 1e-12 ? degenerate + 1 : 0;
      pivot(r, q);
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
  std::vector<double> rhs_;
  std::vector<double> d_;
  double obj0_ = 0.0;
  std::vector<int> basis_;
  std::vector<int> col_;
  std::vector<char> barred_;
  std::vector<std::size_t> nz_;
  long pivots_ = 0;
};

// Internal rows: user equalities, then user >= rows, then upper-bound rows
// written as -x >= -(u - l). Variable ids: structurals [0, n), slacks of the
// >= rows [n, n + g), artificials n + g + row.
struct StandardForm {
  std::size_t n = 0;
  std::size_t meq = 0;
  std::size_t mge = 0;
  std::vector<std::size_t> ub_var;  // structural index of each upper-bound row
  std::vector<double> shift;        // lower bounds
  std::vector<double> rhs;          // per internal row, after the lower-bound shift
  std::vector<double> scale;        // row equilibration factors

  double coef(const LinearProgram& lp, std::size_t row, std::size_t j) const {
    return scale[row] * raw_coef(lp, row, j);
  }
  double raw_coef(const LinearProgram& lp, std::size_t row, std::size_t j) const {
    if (row < meq) return lp.eq_matrix(row, j);
    const std::size_t g = row - meq;
    if (g < lp.ge_matrix.rows()) return lp.ge_matrix(g, j);
    return ub_var[g - lp.ge_matrix.rows()] == j ? -1.0 : 0.0;
  }
};

}  // namespace

LpSolution solve(const LinearProgram& lp, const SimplexOptions& options) {
  lp.validate();
  const std::size_t n = lp.num_vars();

  StandardForm sf;
  sf.n = n;
  sf.meq = lp.eq_matrix.rows();
  sf.shift = lp.lower.empty() ? std::vector<double>(n, 0.0) : lp.lower;
  for (std::size_t j = 0; j < lp.upper.size(); ++j) {
    if (lp.upper[j]) sf.ub_var.push_back(j);
  }
  sf.mge = lp.ge_matrix.rows() + sf.ub_var.size();
  const std::size_t m = sf.meq + sf.mge;

  // Rows are scaled to unit max-norm; badly scaled rows otherwise let small
  // pivots amplify roundoff in the incrementally updated tableau.
  sf.scale.assign(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    double big = 0.0;
    for (std::size_t j = 0; j < n; ++j) big = std::max(big, std::abs(sf.raw_coef(lp, i, j)));
    if (big > 0.0) sf.scale[i] = 1.0 / big;
  }
  sf.rhs.resize(m);
  for (std::size_t i = 0; i < sf.meq; ++i) sf.rhs[i] = lp.eq_rhs[i];
  for (std::size_t g = 0; g < lp.ge_matrix.rows(); ++g) sf.rhs[sf.meq + g] = lp.ge_rhs[g];
  for (std::size_t u = 0; u < sf.ub_var.size(); ++u) {
    sf.rhs[sf.meq + lp.ge_matrix.rows() + u] = -*lp.upper[sf.ub_var[u]];
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (sf.shift[j] != 0.0) sf.rhs[i] -= sf.raw_coef(lp, i, j) * sf.shift[j];
    }
    sf.rhs[i] *= sf.scale[i];
  }

  const bool dual_start =
      sf.meq == 0 && std::all_of(lp.cost.begin(), lp.cost.end(), [](double c) { return c >= 0; });

  // Rows needing an artificial: all equalities, and >= rows violated at the
  // origin unless the dual simplex handles them.
  std::vector<char> artificial(m, 0);
  std::size_t extra_cols = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i < sf.meq) {
      artificial[i] = 1;
    } else if (!dual_start && sf.rhs[i] > 0) {
      artificial[i] = 1;
      ++extra_cols;
    }
  }

  Tableau tab(m, n + extra_cols);
  const int slack_base = static_cast<int>(n);
  const int art_base = static_cast<int>(n + sf.mge);
  for (std::size_t j = 0; j < n; ++j) tab.col()[j] = static_cast<int>(j);

  std::vector<double> phi(m, 1.0);
  std::size_t next_col = n;
  for (std::size_t i = 0; i < m; ++i) {
    if (i < sf.meq) {
      phi[i] = sf.rhs[i] >= 0 ? 1.0 : -1.0;
      tab.basis()[i] = art_base + static_cast<int>(i);
      tab.rhs()[i] = phi[i] * sf.rhs[i];
      for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = phi[i] * sf.coef(lp, i, j);
    } else if (!artificial[i]) {
      // s = -b + a x
      tab.basis()[i] = slack_base + static_cast<int>(i - sf.meq);
      tab.rhs()[i] = -sf.rhs[i];
      for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = -sf.coef(lp, i, j);
    } else {
      // art = b - a x + s
      tab.basis()[i] = art_base + static_cast<int>(i);
      tab.rhs()[i] = sf.rhs[i];
      for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sf.coef(lp, i, j);
      tab.col()[next_col] = slack_base + static_cast<int>(i - sf.meq);
      tab.at(i, next_col) = -1.0;
      ++next_col;
    }
  }

  auto is_artificial = [&](int id) { return id >= art_base; };
  auto cost_of = [&](int id) {
    return id < static_cast<int>(n) ? lp.cost[static_cast<std::size_t>(id)] : 0.0;
  };
  auto load_phase2_costs = [&]() {
    for (std::size_t j = 0; j < tab.cols(); ++j) {
      double v = cost_of(tab.col()[j]);
      for (std::size_t i = 0; i < m; ++i) v -= cost_of(tab.basis()[i]) * tab.at(i, j);
      tab.d()[j] = v;
    }
    double o = 0.0;
    for (std::size_t i = 0; i < m; ++i) o += cost_of(tab.basis()[i]) * tab.rhs()[i];
    tab.obj0() = o;
  };

  // Column of variable `id` in  A x - s + phi art = b  (scaled rows).
  auto column = [&](int id, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (id < slack_base) {
      for (std::size_t i = 0; i < m; ++i) out[i] = sf.coef(lp, i, static_cast<std::size_t>(id));
    } else if (id < art_base) {
      out[sf.meq + static_cast<std::size_t>(id - slack_base)] = -1.0;
    } else {
      const auto row = static_cast<std::size_t>(id - art_base);
      out[row] = phi[row];
    }
  };
  bool phase_one = false;
  auto phase_cost = [&](int id) {
    if (phase_one) return is_artificial(id) ? 1.0 : 0.0;
    return cost_of(id);
  };
  // Dictionary for the current basis from scratch: x_B = B^-1 b - B^-1 N x_N.
  auto reinvert = [&]() {
    const std::size_t k = tab.cols();
    std::vector<double> lu(m * m);
    std::vector<double> rhs_block(m * (k + 1));
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) {
      column(tab.basis()[i], v);
      for (std::size_t r = 0; r < m; ++r) lu[r * m + i] = v[r];
    }
    for (std::size_t j = 0; j < k; ++j) {
      column(tab.col()[j], v);
      for (std::size_t r = 0; r < m; ++r) rhs_block[r * (k + 1) + j] = v[r];
    }
    for (std::size_t r = 0; r < m; ++r) rhs_block[r * (k + 1) + k] = sf.rhs[r];

    // Gaussian elimination with partial pivoting on [B | N b].
    const std::size_t w = k + 1;
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < m; ++r) {
        if (std::abs(lu[r * m + c]) > std::abs(lu[p * m + c])) p = r;
      }
      if (std::abs(lu[p * m + c]) < 1e-13) return;  // keep the updated tableau
      if (p != c) {
        for (std::size_t j = 0; j < m; ++j) std::swap(lu[c * m + j], lu[p * m + j]);
        for (std::size_t j = 0; j < w; ++j) std::swap(rhs_block[c * w + j], rhs_block[p * w + j]);
      }
      const double inv = 1.0 / lu[c * m + c];
      for (std::size_t r = c + 1; r < m; ++r) {
        const double f = lu[r * m + c] * inv;
        if (f == 0.0) continue;
        for (std::size_t j = c + 1; j < m; ++j) lu[r * m + j] -= f * lu[c * m + j];
        for (std::size_t j = 0; j < w; ++j) rhs_block[r * w + j] -= f * rhs_block[c * w + j];
      }
    }
    for (std::size_t c = m; c-- > 0;) {
      const double inv = 1.0 / lu[c * m + c];
      for (std::size_t j = 0; j < w; ++j) rhs_block[c * w + j] *= inv;
      for (std::size_t r = 0; r < c; ++r) {
        const double f = lu[r * m + c];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < w; ++j) rhs_block[r * w + j] -= f * rhs_block[c * w + j];
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) tab.at(i, j) = rhs_block[i * w + j];
      tab.rhs()[i] = rhs_block[i * w + k];
    }
    for (std::size_t j = 0; j < k; ++j) {
      double d = phase_cost(tab.col()[j]);
      for (std::size_t i = 0; i < m; ++i) d -= phase_cost(tab.basis()[i]) * tab.at(i, j);
      tab.d()[j] = d;
    }
    double o = 0.0;
    for (std::size_t i = 0; i < m; ++i) o += phase_cost(tab.basis()[i]) * tab.rhs()[i];
    tab.obj0() = o;
  };
  tab.refresh = reinvert;

  // A terminal status counts only if it survives a fresh reinversion.
  auto confirmed = [&](auto run) {
    Outcome o = run();
    for (int round = 0; round < 8 && o != Outcome::kLimit; ++round) {
      const long before = tab.pivots();
      reinvert();
      o = run();
      if (tab.pivots() == before) break;
    }
    return o;
  };

  LpSolution sol;
  long budget = options.max_pivots;
  Outcome outcome;

  if (dual_start) {
    load_phase2_costs();
    outcome = confirmed([&] { return tab.dual(options, budget); });
    // Roundoff can leave small negative reduced costs behind; the basis is
    // primal feasible, so a primal pass finishes the job.
    if (outcome == Outcome::kOptimal) outcome = confirmed([&] { return tab.primal(options, budget); });
  } else {
    const bool any_art = std::any_of(artificial.begin(), artificial.end(), [](char c) { return c; });
    if (any_art) {
      for (std::size_t j = 0; j < tab.cols(); ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (is_artificial(tab.basis()[i])) v -= tab.at(i, j);
        }
        tab.d()[j] = v;
      }
      double o = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (is_artificial(tab.basis()[i])) o += tab.rhs()[i];
      }
      tab.obj0() = o;

      phase_one = true;
      const Outcome p1 = confirmed([&] { return tab.primal(options, budget); });
      phase_one = false;
      // Artificials that left the basis stay out for good.
      for (std::size_t j = 0; j < tab.cols(); ++j) {
        if (is_artificial(tab.col()[j])) tab.barred()[j] = 1;
      }
      if (p1 == Outcome::kLimit) {
        sol.status = LpStatus::kIterationLimit;
        sol.pivots = tab.pivots();
        return sol;
      }
      double scale = 1.0;
      for (double b : sf.rhs) scale = std::max(scale, std::abs(b));
      if (tab.obj0() > options.feasibility_tolerance * scale) {
        sol.status = LpStatus::kInfeasible;
        sol.pivots = tab.pivots();
        return sol;
      }
      // Drive zero-level artificials out of the basis where possible.
      for (std::size_t i = 0; i < m; ++i) {
        if (!is_artificial(tab.basis()[i])) continue;
        std::size_t q = tab.cols();
        double best = options.pivot_tolerance;
        for (std::size_t j = 0; j < tab.cols(); ++j) {
          if (tab.barred()[j]) continue;
          if (std::abs(tab.at(i, j)) > best) {
            best = std::abs(tab.at(i, j));
            q = j;
          }
        }
        if (q < tab.cols()) {
          tab.pivot(i, q);
          tab.barred()[q] = 1;
        }
      }
    }
    load_phase2_costs();
    outcome = confirmed([&] { return tab.primal(options, budget); });
  }

  sol.pivots = tab.pivots();
  switch (outcome) {
    case Outcome::kOptimal: sol.status = LpStatus::kOptimal; break;
    case Outcome::kUnbounded: sol.status = LpStatus::kUnbounded; return sol;
    case Outcome::kInfeasible: sol.status = LpStatus::kInfeasible; return sol;
    case Outcome::kLimit: sol.status = LpStatus::kIterationLimit; return sol;
  }

  // Primal values.
  sol.x.assign(sf.shift.begin(), sf.shift.end());
  for (std::size_t i = 0; i < m; ++i) {
    const int id = tab.basis()[i];
    if (id < static_cast<int>(n)) sol.x[static_cast<std::size_t>(id)] += tab.rhs()[i];
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.cost[j] * sol.x[j];

  // Duals from the reduced costs of slack and artificial columns.
  std::vector<double> y(m, 0.0);
  for (std::size_t j = 0; j < tab.cols(); ++j) {
    const int id = tab.col()[j];
    if (id >= art_base) {
      const std::size_t row = static_cast<std::size_t>(id - art_base);
      if (row < sf.meq) y[row] = -phi[row] * tab.d()[j];
    } else if (id >= slack_base) {
      y[sf.meq + static_cast<std::size_t>(id - slack_base)] = tab.d()[j];
    }
  }
  for (std::size_t i = 0; i < m; ++i) y[i] *= sf.scale[i];
  sol.eq_duals.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(sf.meq));
  sol.ge_duals.assign(y.begin() + static_cast<std::ptrdiff_t>(sf.meq),
                      y.begin() + static_cast<std::ptrdiff_t>(sf.meq + lp.ge_matrix.rows()));
  sol.reduced_costs = lp.cost;
  for (std::size_t i = 0; i < sf.meq; ++i) {
    for (std::size_t j = 0; j < n; ++j) sol.reduced_costs[j] -= sol.eq_duals[i] * lp.eq_matrix(i, j);
  }
  for (std::size_t g = 0; g < lp.ge_matrix.rows(); ++g) {
    for (std::size_t j = 0; j < n; ++j) sol.reduced_costs[j] -= sol.ge_duals[g] * lp.ge_matrix(g, j);
  }
  return sol;
}

}  // namespace surge
