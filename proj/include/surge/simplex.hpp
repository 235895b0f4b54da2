#pragma once

// Dense tableau simplex for small and medium LPs.
//
//   minimize    c^T x
//   subject to  A_eq x  = b_eq
//               A_ge x >= b_ge
//               lower <= x <= upper   (lower finite, upper optional)
//
// The tableau is kept in dictionary form (one column per nonbasic variable).
// A start that is dual feasible (c >= 0, no equality rows) is solved by the
// dual simplex directly; everything else goes through a two-phase primal
// simplex. Pricing is Dantzig with a switch to Bland's rule after a run of
// degenerate pivots, so the pivot sequence is a deterministic function of
// the input.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace surge {

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major dense matrix with a fixed column count.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  /// Appends a row; the first row added fixes the column count of an empty matrix.
  void add_row(std::span<const double> values);
  /// Appends a zero row and returns it for filling.
  std::span<double> add_zero_row();
  void set_cols(std::size_t cols);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LinearProgram {
  std::vector<double> cost;
  Matrix eq_matrix;
  std::vector<double> eq_rhs;
  Matrix ge_matrix;
  std::vector<double> ge_rhs;
  std::vector<double> lower;                 // empty means all zero
  std::vector<std::optional<double>> upper;  // empty means none

  explicit LinearProgram(std::size_t num_vars = 0);
  std::size_t num_vars() const { return cost.size(); }

  /// a^T x >= rhs
  void add_ge(std::span<const double> a, double rhs);
  /// a^T x <= rhs, stored as -a^T x >= -rhs
  void add_le(std::span<const double> a, double rhs);
  void add_eq(std::span<const double> a, double rhs);

  /// Throws LpError on inconsistent dimensions or non-finite entries.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  std::vector<double> eq_duals;
  std::vector<double> ge_duals;  // >= 0 at optimality
  std::vector<double> reduced_costs;  // c - A^T y over the user rows
  double objective = 0.0;
  long pivots = 0;
};

struct SimplexOptions {
  double pivot_tolerance = 1e-9;
  double feasibility_tolerance = 1e-8;
  double optimality_tolerance = 1e-12;
  long max_pivots = 5'000'000;
  int degenerate_switch = 50;  // consecutive degenerate pivots before Bland
};

LpSolution solve(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace surge
