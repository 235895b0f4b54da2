#pragma once

// Convex piecewise-linear day costs.
//
// Both cost families reduce to z_t = max_i { s_i * (omega_t / kappa_t) + k_i }
// where kappa_t is a per-day scale: 1 for threshold costs, and for queueing
// costs the "load" rho_t * omega_t, which depends on the general-population
// infectives through the demand surge.

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace surge {

class CostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AffinePiece {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
};

/// max over affine pieces. Ties resolve to the smallest piece index.
struct PiecewiseLinearConvex {
  std::vector<AffinePiece> pieces;
};

struct PwlValue {
  double value = 0.0;
  std::size_t active = 0;
};

PwlValue eval_pwl(const PiecewiseLinearConvex& f, double x);

struct QueueingCostSpec {
  double arrival_rate = 500.0;     // zeta-bar, patients/day
  double service_rate = 30.0;      // mu, patients/day/server
  double initial_occupancy = 0.875;  // rho_0
  double demand_surge = 0.0007;    // delta: added arrivals per general infective
  double exp_shift = 0.95;         // shift in exp(rho - shift)
  std::vector<double> breakpoints;  // rho values, strictly increasing

  /// s_0 = zeta-bar / (rho_0 mu).
  double baseline_servers() const { return arrival_rate / (initial_occupancy * service_rate); }
  void validate() const;
};

/// Uniform grid of `count` breakpoints on [lo, hi].
std::vector<double> uniform_breakpoints(double lo, double hi, int count);

/// rho_t = (zeta-bar + delta I1) / (s_t mu) with s_t = s_0 * omega / omega_0.
double utilization(const QueueingCostSpec& spec, double baseline_workforce, double workforce,
                   double general_infectives);

/// Tangent lines of g(rho) = exp(rho - shift) - exp(rho_min - shift) at every
/// breakpoint, rho_min being the first one.
PiecewiseLinearConvex linearize_exp(double exp_shift, std::span<const double> breakpoints);

/// g(rho) for the linearization above; the exact curve it underestimates.
double shifted_exp(double exp_shift, double rho_min, double rho);

enum class CostKind { kThreshold, kQueueing };

/// Per-day cost evaluator (omega_t, I1_t) -> z_t. Every piece has slope <= 0,
/// so cost never increases with staff.
class DayCost {
 public:
  DayCost() = default;

  CostKind kind() const { return kind_; }

  /// Piece list in omega for a day with the given general infectives.
  PiecewiseLinearConvex pieces(double general_infectives) const;
  std::size_t piece_count() const { return unit_.pieces.size(); }

  double scale(double general_infectives) const;
  PwlValue operator()(double workforce, double general_infectives) const;
  /// Slope d z / d omega of piece i on that day.
  double slope(std::size_t piece, double general_infectives) const {
    return unit_.pieces[piece].slope / scale(general_infectives);
  }

  /// Load metric for reports: rho_t for queueing, omega_t for threshold.
  double load(double workforce, double general_infectives) const;

  const PiecewiseLinearConvex& unit_pieces() const { return unit_; }

  friend DayCost threshold_cost_fn(PiecewiseLinearConvex pieces);
  friend DayCost queueing_cost_fn(const QueueingCostSpec& spec, double baseline_workforce);

 private:
  CostKind kind_ = CostKind::kThreshold;
  PiecewiseLinearConvex unit_;
  // kappa = load_base + load_per_infective * I1 (queueing only).
  double load_base_ = 1.0;
  double load_per_infective_ = 0.0;
};

/// Pieces must have slopes <= 0 and include a zero-cost level (k = 0 piece
/// with slope 0) so full staffing costs nothing.
DayCost threshold_cost_fn(PiecewiseLinearConvex pieces);

/// baseline_workforce is omega_0, the regular staff available at day 1.
DayCost queueing_cost_fn(const QueueingCostSpec& spec, double baseline_workforce);

}  // namespace surge
