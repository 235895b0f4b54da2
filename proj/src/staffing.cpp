#include "surge/staffing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace surge {

void DeploymentConstraints::validate() const {
  std::ostringstream err;
  if (!(total_budget >= 0)) err << "  total budget must be >= 0\n";
  if (service_days < 1) err << "  service length tau must be >= 1\n";
  if (lag < 0) err << "  deployment lag must be >= 0\n";
  if (per_period_cap && !(*per_period_cap >= 0)) err << "  per-period cap must be >= 0\n";
  if (planner_horizon < 1) err << "  planner horizon must be >= 1\n";
  if (start_offset < 0) err << "  deployment start offset must be >= 0\n";
  const std::string msg = err.str();
  if (!msg.empty()) throw InfeasibleDeployment("invalid deployment constraints:\n" + msg);
}

double DeploymentVector::total() const { return std::accumulate(h_.begin(), h_.end(), 0.0); }

void check_feasible(const DeploymentVector& h, const DeploymentConstraints& c) {
  std::ostringstream err;
  if (h.size() != static_cast<std::size_t>(c.planner_horizon)) {
    err << "  length " << h.size() << " differs from planner horizon " << c.planner_horizon << "\n";
  }
  const double tol = 1e-9 * std::max(1.0, c.total_budget);
  for (std::size_t s = 0; s < h.size(); ++s) {
    if (!std::isfinite(h[s]) || h[s] < -tol) err << "  h[" << s << "] = " << h[s] << " is negative\n";
    if (c.per_period_cap && h[s] > *c.per_period_cap + tol) {
      err << "  h[" << s << "] = " << h[s] << " exceeds per-period cap " << *c.per_period_cap << "\n";
    }
  }
  if (h.total() > c.total_budget + tol) {
    err << "  total " << h.total() << " exceeds budget " << c.total_budget << "\n";
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw InfeasibleDeployment("infeasible deployment:\n" + msg);
}

PlannerView make_planner_view(const Trajectory& trajectory, const SeirParams& params,
                              const DeploymentConstraints& constraints) {
  PlannerView v;
  v.tuple = trajectory.tuple;
  v.declaration_day = trajectory.declaration_day;
  v.latent_stay = std::exp(-params.latent_exit_rate());
  if (!v.declaration_day) return v;

  const int first = *v.declaration_day;
  const int last = std::min(trajectory.horizon(), first + constraints.planner_horizon - 1);
  const auto n = static_cast<std::size_t>(std::max(0, last - first + 1));
  v.regular_staff.reserve(n);
  v.surge_hazard.reserve(n);
  v.general_infectives.reserve(n);
  for (int a = first; a <= last; ++a) {
    const DayRecord& d = trajectory.day(a);
    v.regular_staff.push_back(d.state[1].active());
    v.surge_hazard.push_back(d.contact_rate[1] * d.beta * d.contagion);
    v.general_infectives.push_back(d.state[0].I);
  }
  return v;
}

std::vector<double> cohort_availability(const PlannerView& view, int service_days, int arrival) {
  std::vector<double> out;
  const int days = static_cast<int>(view.days());
  if (arrival < 0 || arrival >= days) return out;
  const int len = std::min(service_days, days - arrival);
  out.resize(static_cast<std::size_t>(len));
  double s = 1.0;
  double e = 0.0;
  for (int j = 0; j < len; ++j) {
    out[static_cast<std::size_t>(j)] = s + e;
    const double escape = std::exp(-view.surge_hazard[static_cast<std::size_t>(arrival + j)]);
    e = (1.0 - escape) * s + view.latent_stay * e;
    s *= escape;
  }
  return out;
}

double CohortTable::available(std::size_t t) const {
  double sum = 0.0;
  for (double v : susceptible[t]) sum += v;
  for (double v : exposed[t]) sum += v;
  return sum;
}

CohortTable surge_cohort_propagate(const PlannerView& view, const DeploymentConstraints& c,
                                   const DeploymentVector& h) {
  if (h.size() < static_cast<std::size_t>(c.planner_horizon)) {
    throw InfeasibleDeployment("deployment vector shorter than the planner horizon");
  }
  const std::size_t days = view.days();
  const auto tau = static_cast<std::size_t>(c.service_days);
  CohortTable tab;
  tab.susceptible.assign(days, std::vector<double>(tau, 0.0));
  tab.exposed.assign(days, std::vector<double>(tau, 0.0));

  // Arrivals at age 1.
  for (std::size_t s = 0; s < h.size(); ++s) {
    const int arr = c.arrival_index(static_cast<int>(s));
    if (arr < static_cast<int>(days)) tab.susceptible[static_cast<std::size_t>(arr)][0] = h[s];
  }
  for (std::size_t t = 0; t + 1 < days; ++t) {
    const double escape = std::exp(-view.surge_hazard[t]);
    for (std::size_t j = 0; j + 1 < tau; ++j) {
      tab.susceptible[t + 1][j + 1] = escape * tab.susceptible[t][j];
      tab.exposed[t + 1][j + 1] =
          (1.0 - escape) * tab.susceptible[t][j] + view.latent_stay * tab.exposed[t][j];
    }
  }
  return tab;
}

double AffineWorkforce::workforce(std::size_t t, std::span<const double> h) const {
  double w = constant[t];
  auto row = coeff.row(t);
  for (std::size_t s = 0; s < h.size(); ++s) w += row[s] * h[s];
  return w;
}

AffineWorkforce affine_workforce(const PlannerView& view, const DeploymentConstraints& c) {
  const std::size_t days = view.days();
  const auto width = static_cast<std::size_t>(c.planner_horizon);
  AffineWorkforce aw;
  aw.constant = view.regular_staff;
  aw.coeff = Matrix(days, width);
  for (std::size_t s = 0; s < width; ++s) {
    const int arr = c.arrival_index(static_cast<int>(s));
    const std::vector<double> avail = cohort_availability(view, c.service_days, arr);
    for (std::size_t j = 0; j < avail.size(); ++j) {
      aw.coeff(static_cast<std::size_t>(arr) + j, s) = avail[j];
    }
  }
  return aw;
}

std::vector<double> workforce_series(const PlannerView& view, const DeploymentConstraints& c,
                                     std::span<const double> h) {
  std::vector<double> w = view.regular_staff;
  for (std::size_t s = 0; s < h.size(); ++s) {
    if (h[s] == 0.0) continue;
    const int arr = c.arrival_index(static_cast<int>(s));
    const std::vector<double> avail = cohort_availability(view, c.service_days, arr);
    for (std::size_t j = 0; j < avail.size(); ++j) w[static_cast<std::size_t>(arr) + j] += h[s] * avail[j];
  }
  return w;
}

CostBreakdown evaluate_detailed(const DeploymentVector& h, const PlannerView& view,
                                const DayCost& cost, const DeploymentConstraints& c) {
  check_feasible(h, c);
  CostBreakdown out;
  out.workforce = workforce_series(view, c, h.values());
  const std::size_t days = view.days();
  out.day_cost.resize(days);
  out.load.resize(days);
  out.active_piece.resize(days);
  for (std::size_t t = 0; t < days; ++t) {
    const PwlValue z = cost(out.workforce[t], view.general_infectives[t]);
    out.day_cost[t] = z.value;
    out.active_piece[t] = z.active;
    out.load[t] = cost.load(out.workforce[t], view.general_infectives[t]);
    out.total += z.value;
  }
  return out;
}

double evaluate_cost(const DeploymentVector& h, const PlannerView& view, const DayCost& cost,
                     const DeploymentConstraints& c) {
  check_feasible(h, c);
  const std::vector<double> w = workforce_series(view, c, h.values());
  double total = 0.0;
  for (std::size_t t = 0; t < w.size(); ++t) total += cost(w[t], view.general_infectives[t]).value;
  return total;
}

double evaluate_cost(const DeploymentVector& h, const ContagionTuple& tuple, const DayCost& cost,
                     const SeirParams& params, const DeploymentConstraints& c) {
  validate_tuple(tuple, params.horizon);
  const PlannerView view = make_planner_view(simulate(params, tuple), params, c);
  return evaluate_cost(h, view, cost, c);
}

double Cut::operator()(std::span<const double> h) const {
  double v = intercept;
  for (std::size_t s = 0; s < h.size(); ++s) v += gradient[s] * h[s];
  return v;
}

Cut subgradient_cut(const DeploymentVector& h, const PlannerView& view, const DayCost& cost,
                    const DeploymentConstraints& c) {
  check_feasible(h, c);
  const std::vector<double> w = workforce_series(view, c, h.values());
  // Adjoint weights: slope of the active piece on each day.
  std::vector<double> weight(w.size());
  double value = 0.0;
  for (std::size_t t = 0; t < w.size(); ++t) {
    const PwlValue z = cost(w[t], view.general_infectives[t]);
    value += z.value;
    weight[t] = cost.slope(z.active, view.general_infectives[t]);
  }
  Cut cut;
  cut.source = view.tuple;
  cut.gradient.assign(h.size(), 0.0);
  for (std::size_t s = 0; s < h.size(); ++s) {
    const int arr = c.arrival_index(static_cast<int>(s));
    const std::vector<double> avail = cohort_availability(view, c.service_days, arr);
    double g = 0.0;
    for (std::size_t j = 0; j < avail.size(); ++j) g += weight[static_cast<std::size_t>(arr) + j] * avail[j];
    cut.gradient[s] = g;
  }
  double gh = 0.0;
  for (std::size_t s = 0; s < h.size(); ++s) gh += cut.gradient[s] * h[s];
  cut.intercept = value - gh;
  return cut;
}

ExplicitCostLp build_cost_lp(const DeploymentVector& h, const PlannerView& view,
                             const DayCost& cost, const DeploymentConstraints& c) {
  check_feasible(h, c);
  const std::size_t days = view.days();
  const auto tau = static_cast<std::size_t>(c.service_days);
  auto s_var = [&](std::size_t t, std::size_t j) { return t * tau + j; };
  auto e_var = [&](std::size_t t, std::size_t j) { return days * tau + t * tau + j; };
  auto w_var = [&](std::size_t t) { return 2 * days * tau + t; };
  auto z_var = [&](std::size_t t) { return 2 * days * tau + days + t; };
  const std::size_t n = 2 * days * tau + 2 * days;

  ExplicitCostLp out{LinearProgram(n), std::vector<int>(h.size(), -1)};
  LinearProgram& lp = out.lp;
  for (std::size_t t = 0; t < days; ++t) lp.cost[z_var(t)] = 1.0;

  std::vector<double> row(n, 0.0);
  auto emit_eq = [&](double rhs) {
    lp.add_eq(row, rhs);
    std::fill(row.begin(), row.end(), 0.0);
  };

  std::vector<int> arrival_of_day(days, -1);
  for (std::size_t s = 0; s < h.size(); ++s) {
    const int arr = c.arrival_index(static_cast<int>(s));
    if (arr < static_cast<int>(days)) arrival_of_day[static_cast<std::size_t>(arr)] = static_cast<int>(s);
  }
  for (std::size_t t = 0; t < days; ++t) {
    // First-age cohort: pinned to the call-up that arrives today, else empty.
    row[s_var(t, 0)] = 1.0;
    const int s = arrival_of_day[t];
    if (s >= 0) out.callup_rows[static_cast<std::size_t>(s)] = static_cast<int>(lp.eq_rhs.size());
    emit_eq(s >= 0 ? h[static_cast<std::size_t>(s)] : 0.0);
    row[e_var(t, 0)] = 1.0;
    emit_eq(0.0);
    for (std::size_t j = 1; j < tau; ++j) {
      if (t == 0) {
        row[s_var(0, j)] = 1.0;
        emit_eq(0.0);
        row[e_var(0, j)] = 1.0;
        emit_eq(0.0);
        continue;
      }
      const double escape = std::exp(-view.surge_hazard[t - 1]);
      row[s_var(t, j)] = 1.0;
      row[s_var(t - 1, j - 1)] = -escape;
      emit_eq(0.0);
      row[e_var(t, j)] = 1.0;
      row[s_var(t - 1, j - 1)] = -(1.0 - escape);
      row[e_var(t - 1, j - 1)] = -view.latent_stay;
      emit_eq(0.0);
    }
    row[w_var(t)] = 1.0;
    for (std::size_t j = 0; j < tau; ++j) {
      row[s_var(t, j)] = -1.0;
      row[e_var(t, j)] = -1.0;
    }
    emit_eq(view.regular_staff[t]);
  }
  for (std::size_t t = 0; t < days; ++t) {
    const PiecewiseLinearConvex f = cost.pieces(view.general_infectives[t]);
    for (const AffinePiece& p : f.pieces) {
      row[z_var(t)] = 1.0;
      row[w_var(t)] = -p.slope;
      lp.add_ge(row, p.intercept);
      std::fill(row.begin(), row.end(), 0.0);
    }
  }
  return out;
}

}  // namespace surge
