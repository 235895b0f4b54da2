#include "surge/cost.hpp"

#include <cmath>
#include <string>

namespace surge {

PwlValue eval_pwl(const PiecewiseLinearConvex& f, double x) {
  if (f.pieces.empty()) throw CostError("empty piece list");
  PwlValue best{f.pieces[0](x), 0};
  for (std::size_t i = 1; i < f.pieces.size(); ++i) {
    const double v = f.pieces[i](x);
    if (v > best.value) best = {v, i};
  }
  return best;
}

void QueueingCostSpec::validate() const {
  if (!(arrival_rate > 0)) throw CostError("arrival rate must be > 0");
  if (!(service_rate > 0)) throw CostError("service rate must be > 0");
  if (!(initial_occupancy > 0 && initial_occupancy < 1)) {
    throw CostError("initial occupancy rho_0 must lie in (0, 1)");
  }
  if (!(demand_surge >= 0)) throw CostError("demand surge must be >= 0");
  if (breakpoints.size() < 2) throw CostError("at least two breakpoints are required");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw CostError("breakpoints must be strictly increasing");
    }
  }
  if (!(breakpoints.front() > 0)) throw CostError("breakpoints must be > 0");
}

std::vector<double> uniform_breakpoints(double lo, double hi, int count) {
  if (count < 2 || !(hi > lo)) throw CostError("need count >= 2 and hi > lo");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * (static_cast<double>(i) / (count - 1));
  }
  return out;
}

double utilization(const QueueingCostSpec& spec, double baseline_workforce, double workforce,
                   double general_infectives) {
  if (!(workforce > 0)) throw CostError("no servers");
  const double servers = spec.baseline_servers() * workforce / baseline_workforce;
  return (spec.arrival_rate + spec.demand_surge * general_infectives) /
         (servers * spec.service_rate);
}

double shifted_exp(double exp_shift, double rho_min, double rho) {
  return std::exp(rho - exp_shift) - std::exp(rho_min - exp_shift);
}

PiecewiseLinearConvex linearize_exp(double exp_shift, std::span<const double> breakpoints) {
  if (breakpoints.size() < 2) throw CostError("at least two breakpoints are required");
  const double rho_min = breakpoints.front();
  PiecewiseLinearConvex f;
  for (double b : breakpoints) {
    const double value = shifted_exp(exp_shift, rho_min, b);
    const double slope = std::exp(b - exp_shift);
    f.pieces.push_back({slope, value - slope * b});
  }
  return f;
}

PiecewiseLinearConvex DayCost::pieces(double general_infectives) const {
  const double k = scale(general_infectives);
  PiecewiseLinearConvex out = unit_;
  for (auto& p : out.pieces) p.slope /= k;
  return out;
}

double DayCost::scale(double general_infectives) const {
  return load_base_ + load_per_infective_ * general_infectives;
}

PwlValue DayCost::operator()(double workforce, double general_infectives) const {
  return eval_pwl(unit_, workforce / scale(general_infectives));
}

double DayCost::load(double workforce, double general_infectives) const {
  if (kind_ == CostKind::kThreshold) return workforce;
  if (!(workforce > 0)) throw CostError("no servers");
  return scale(general_infectives) / workforce;
}

DayCost threshold_cost_fn(PiecewiseLinearConvex pieces) {
  const auto& p = pieces.pieces;
  if (p.empty()) throw CostError("empty piece list");
  if (p[0].slope != 0.0 || p[0].intercept != 0.0) {
    throw CostError("first threshold piece must be (slope 0, intercept 0)");
  }
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!(p[i].slope < p[i - 1].slope) || !(p[i].intercept > p[i - 1].intercept)) {
      throw CostError("threshold pieces need strictly decreasing slopes and increasing intercepts");
    }
  }
  DayCost c;
  c.kind_ = CostKind::kThreshold;
  c.unit_ = std::move(pieces);
  return c;
}

DayCost queueing_cost_fn(const QueueingCostSpec& spec, double baseline_workforce) {
  spec.validate();
  if (!(baseline_workforce > 0)) throw CostError("baseline workforce must be > 0");

  // With u = omega / kappa we have rho = 1 / u. Each piece is the tangent of
  // g(1/u) at u_b = 1/rho_b, which touches g at rho_b exactly.
  const double rho_min = spec.breakpoints.front();
  DayCost c;
  c.kind_ = CostKind::kQueueing;
  c.unit_.pieces.push_back({0.0, 0.0});
  for (double b : spec.breakpoints) {
    const double g = shifted_exp(spec.exp_shift, rho_min, b);
    const double dg = std::exp(b - spec.exp_shift);
    c.unit_.pieces.push_back({-dg * b * b, g + dg * b});
  }
  const double per_server = baseline_workforce / (spec.baseline_servers() * spec.service_rate);
  c.load_base_ = spec.arrival_rate * per_server;
  c.load_per_infective_ = spec.demand_surge * per_server;
  return c;
}

}  // namespace surge
