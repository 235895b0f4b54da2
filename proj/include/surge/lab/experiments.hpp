#pragma once

// Experiment drivers: the robust solve with its naive and no-intervention
// comparisons, out-of-sample evaluation, budget sweeps and constant-p scans.

#include <string>
#include <vector>

#include "surge/lab/config.hpp"
#include "surge/robust.hpp"
#include "surge/staffing.hpp"

namespace surge::lab {

/// Cost of one policy on one tuple, with the load summary used in reports.
struct ScenarioRow {
  std::string scenario;  // label of the tuple
  std::string policy;    // "no_intervention", "robust", "naive", ...
  ContagionTuple tuple;
  std::optional<int> declaration_day;
  double cost = 0.0;
  double peak_load = 0.0;  // max rho (queueing) or min omega (threshold)
  int stressed_days = 0;   // days with rho >= 1 (past roundoff), or days with positive cost
};

struct NamedPolicy {
  std::string name;
  DeploymentVector h;
};

/// Evaluates every policy on every labelled tuple.
std::vector<ScenarioRow> scenario_report(const std::vector<std::pair<std::string, ContagionTuple>>& tuples,
                                         const std::vector<NamedPolicy>& policies,
                                         ScenarioCache& cache, const DayCost& cost);

/// Floor, then hand the remaining units to the largest fractional parts
/// (ties to the earlier day) without exceeding the budget or the cap.
DeploymentVector round_integral(const DeploymentVector& h, const DeploymentConstraints& c);

struct SolveResult {
  RobustPolicy robust;
  std::vector<RefinementLevel> levels;
  NaivePolicy naive;
  DeploymentVector zero;

  // Worst-case costs over the final grid.
  WorstCase robust_worst;
  WorstCase naive_worst;
  WorstCase no_action_worst;

  DeploymentVector rounded;
  WorstCase rounded_worst;

  std::vector<ScenarioRow> scenarios;
  std::vector<IterationRecord> log;
};

/// Procedure A, then Algorithm B under the doubling schedule, then the naive
/// policy and the three-scenario comparison.
SolveResult run_solve(const ExperimentConfig& config);

/// Grid the config's final N produces.
std::vector<ContagionTuple> final_grid(const ExperimentConfig& config);

/// Worst case of a fixed policy over the config's final grid.
WorstCase evaluate_policy(const ExperimentConfig& config, const DeploymentVector& h);

struct OutOfSampleRow {
  ContagionTuple tuple;
  std::optional<int> declaration_day;
  double policy_cost = 0.0;
  double no_intervention_cost = 0.0;
};

/// Fixed policy against arbitrary tuples (they may lie outside the set).
std::vector<OutOfSampleRow> run_out_of_sample(const DeploymentVector& h,
                                              const ExperimentConfig& config,
                                              const std::vector<ContagionTuple>& tuples);

struct CostBenefitRow {
  double budget = 0.0;
  std::string policy;  // "robust" or "naive"
  double staff_used = 0.0;
  ContagionTuple worst_tuple;
  double worst_cost = 0.0;
  double no_intervention_cost = 0.0;  // at the same tuple
  double peak_load = 0.0;
  double peak_load_no_intervention = 0.0;
  int stressed_days = 0;
  int stressed_days_no_intervention = 0;
  std::optional<double> marginal;  // -(cost change) / (budget change) against the previous row
};

std::vector<CostBenefitRow> run_cost_benefit(const ExperimentConfig& config,
                                             const std::vector<double>& budgets);

struct PScanRow {
  double p = 0.0;
  std::string policy;
  double cost = 0.0;
};

/// Constant-p tuples (p, p, first change day) for each grid value.
std::vector<PScanRow> run_p_scan(const ExperimentConfig& config,
                                 const std::vector<NamedPolicy>& policies,
                                 const std::vector<double>& p_grid);

/// Evenly spaced values on [lo, hi], both ends included.
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace surge::lab
