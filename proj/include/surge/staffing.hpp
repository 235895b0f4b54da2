#pragma once

// Surge-staff cohorts, workforce availability and the cost V(h | p) of a
// deployment vector h under one contagion tuple.
//
// Time here is the planner's: relative day 1 is the declaration day. Call-up
// index s (0-based) happens on relative day s + 1 + start_offset and the
// cohort starts work `lag` days later. A cohort works for at most `tau` days
// and loses members to infection with the workforce group's hazard
// lambda^2_t beta_t p_t. Exposed members still work; infectious ones leave.
//
// Surge staff do not feed back into the epidemic, so the workforce on each
// day is affine in h: omega_t = c_t + A_t h.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "surge/cost.hpp"
#include "surge/epidemic.hpp"
#include "surge/simplex.hpp"

namespace surge {

class InfeasibleDeployment : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeploymentConstraints {
  double total_budget = 3000.0;           // persons
  int service_days = 7;                   // tau
  int lag = 1;                            // days from call-up to arrival
  std::optional<double> per_period_cap;   // persons per call-up day
  int planner_horizon = 150;              // T_rel, days after declaration
  int start_offset = 0;                   // days before the first call-up

  void validate() const;
  /// 0-based planner day on which call-up s starts work.
  int arrival_index(int s) const { return s + start_offset + lag; }
};

/// Per-relative-day call-up counts.
class DeploymentVector {
 public:
  DeploymentVector() = default;
  explicit DeploymentVector(std::size_t days) : h_(days, 0.0) {}
  explicit DeploymentVector(std::vector<double> h) : h_(std::move(h)) {}

  std::size_t size() const { return h_.size(); }
  double operator[](std::size_t s) const { return h_[s]; }
  double& operator[](std::size_t s) { return h_[s]; }
  std::span<const double> values() const { return h_; }
  std::vector<double>& raw() { return h_; }
  double total() const;

  bool operator==(const DeploymentVector&) const = default;

 private:
  std::vector<double> h_;
};

/// Throws InfeasibleDeployment naming every violated constraint.
void check_feasible(const DeploymentVector& h, const DeploymentConstraints& c);

/// What the planner's timeline sees of one simulated trajectory.
struct PlannerView {
  ContagionTuple tuple;
  std::optional<int> declaration_day;
  std::vector<double> regular_staff;       // c_t = S2 + E2 + R2
  std::vector<double> surge_hazard;        // lambda^2_t beta_t p_t
  std::vector<double> general_infectives;  // I1_t
  double latent_stay = 0.0;                // exp(-mu_E)

  /// Planner days covered; shorter than T_rel if the simulation ends first,
  /// zero if the epidemic is never declared.
  std::size_t days() const { return regular_staff.size(); }
};

PlannerView make_planner_view(const Trajectory& trajectory, const SeirParams& params,
                              const DeploymentConstraints& constraints);

/// Availability of one surge worker by age (1..tau) for a cohort that starts
/// on planner day `arrival` (0-based); truncated at the end of the window.
std::vector<double> cohort_availability(const PlannerView& view, int service_days, int arrival);

struct CohortTable {
  // [t][j]: planner day t (0-based), age j + 1.
  std::vector<std::vector<double>> susceptible;
  std::vector<std::vector<double>> exposed;

  double available(std::size_t t) const;
};

CohortTable surge_cohort_propagate(const PlannerView& view, const DeploymentConstraints& c,
                                   const DeploymentVector& h);

struct AffineWorkforce {
  std::vector<double> constant;  // c_t
  Matrix coeff;                  // A(t, s)

  double workforce(std::size_t t, std::span<const double> h) const;
};

AffineWorkforce affine_workforce(const PlannerView& view, const DeploymentConstraints& c);

struct CostBreakdown {
  double total = 0.0;
  std::vector<double> workforce;
  std::vector<double> day_cost;
  std::vector<double> load;  // rho_t or omega_t, see DayCost::load
  std::vector<std::size_t> active_piece;
};

/// Workforce omega_t on every planner day.
std::vector<double> workforce_series(const PlannerView& view, const DeploymentConstraints& c,
                                     std::span<const double> h);

double evaluate_cost(const DeploymentVector& h, const PlannerView& view, const DayCost& cost,
                     const DeploymentConstraints& c);
CostBreakdown evaluate_detailed(const DeploymentVector& h, const PlannerView& view,
                                const DayCost& cost, const DeploymentConstraints& c);

/// Simulates the tuple first.
double evaluate_cost(const DeploymentVector& h, const ContagionTuple& tuple, const DayCost& cost,
                     const SeirParams& params, const DeploymentConstraints& c);

/// V(h' | p) >= g . h' + b for every h', with equality at the generation point.
struct Cut {
  std::vector<double> gradient;
  double intercept = 0.0;
  ContagionTuple source;

  double operator()(std::span<const double> h) const;
};

Cut subgradient_cut(const DeploymentVector& h, const PlannerView& view, const DayCost& cost,
                    const DeploymentConstraints& c);

/// The cost LP with explicit cohort, workforce and day-cost variables. Row
/// `callup_rows[s]` of the equality block pins the first-age cohort to h_s
/// (absent, -1, when the cohort starts after the window).
struct ExplicitCostLp {
  LinearProgram lp;
  std::vector<int> callup_rows;
};

ExplicitCostLp build_cost_lp(const DeploymentVector& h, const PlannerView& view,
                             const DayCost& cost, const DeploymentConstraints& c);

}  // namespace surge
