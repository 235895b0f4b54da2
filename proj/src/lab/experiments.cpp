#include "surge/lab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace surge::lab {

namespace {

// rho at or above 1, ignoring LP solutions that sit exactly on the boundary.
constexpr double kSaturated = 1.0 + 1e-9;

struct LoadSummary {
  double cost = 0.0;
  double peak = 0.0;
  int stressed = 0;
};

LoadSummary summarize(const DeploymentVector& h, const PlannerView& view, const DayCost& cost,
                      const DeploymentConstraints& c) {
  LoadSummary s;
  if (view.days() == 0) return s;
  const CostBreakdown b = evaluate_detailed(h, view, cost, c);
  s.cost = b.total;
  if (cost.kind() == CostKind::kQueueing) {
    s.peak = *std::max_element(b.load.begin(), b.load.end());
    s.stressed = static_cast<int>(std::count_if(b.load.begin(), b.load.end(),
                                                [](double rho) { return rho > kSaturated; }));
  } else {
    s.peak = *std::min_element(b.load.begin(), b.load.end());
    s.stressed = static_cast<int>(std::count_if(b.day_cost.begin(), b.day_cost.end(),
                                                [](double z) { return z > 0.0; }));
  }
  return s;
}

int final_grid_size(const ExperimentConfig& config) {
  int n = config.solver.grid_start;
  while (n * 2 <= config.solver.grid_max) n *= 2;
  return n;
}

}  // namespace

std::vector<ScenarioRow> scenario_report(
    const std::vector<std::pair<std::string, ContagionTuple>>& tuples,
    const std::vector<NamedPolicy>& policies, ScenarioCache& cache, const DayCost& cost) {
  std::vector<ScenarioRow> rows;
  for (const auto& [label, tuple] : tuples) {
    const PlannerView& view = cache.view(tuple);
    for (const auto& p : policies) {
      const LoadSummary s = summarize(p.h, view, cost, cache.constraints());
      rows.push_back({label, p.name, tuple, view.declaration_day, s.cost, s.peak, s.stressed});
    }
  }
  return rows;
}

DeploymentVector round_integral(const DeploymentVector& h, const DeploymentConstraints& c) {
  DeploymentVector out(h.size());
  std::vector<std::pair<double, std::size_t>> frac;
  double floors = 0.0;
  for (std::size_t s = 0; s < h.size(); ++s) {
    const double v = std::max(0.0, h[s]);
    out[s] = std::floor(v + 1e-9);
    floors += out[s];
    frac.push_back({v - out[s], s});
  }
  double target = std::min(std::floor(c.total_budget + 1e-9), std::round(h.total()));
  std::stable_sort(frac.begin(), frac.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [f, s] : frac) {
    if (floors >= target) break;
    if (f <= 0.0) break;
    if (c.per_period_cap && out[s] + 1.0 > *c.per_period_cap + 1e-9) continue;
    out[s] += 1.0;
    floors += 1.0;
  }
  return out;
}

std::vector<ContagionTuple> final_grid(const ExperimentConfig& config) {
  return enumerate_tuples(config.uncertainty.with_grid(final_grid_size(config)));
}

WorstCase evaluate_policy(const ExperimentConfig& config, const DeploymentVector& h) {
  const DayCost cost = config.make_cost();
  ScenarioCache cache(config.epidemic, config.deployment);
  const std::vector<ContagionTuple> tuples = final_grid(config);
  cache.prepare(tuples, config.solver.workers);
  return worst_case(h, tuples, cache, cost, config.solver.workers);
}

SolveResult run_solve(const ExperimentConfig& config) {
  const DayCost cost = config.make_cost();
  ScenarioCache cache(config.epidemic, config.deployment);
  RobustContext ctx{cache, cost, config.robust_options()};
  const int workers = config.solver.workers;

  SolveResult r;
  RefinedPolicy refined = refine_doubling(config.uncertainty, config.solver.grid_start,
                                          config.solver.grid_max, ctx, config.solver.hot_start);
  r.robust = std::move(refined.policy);
  r.levels = std::move(refined.levels);
  r.log = r.robust.log;

  const std::vector<ContagionTuple> tuples = final_grid(config);
  r.naive = naive_worst_case_policy(tuples, ctx);
  r.zero = DeploymentVector(static_cast<std::size_t>(config.deployment.planner_horizon));
  r.robust_worst = worst_case(r.robust.h, tuples, cache, cost, workers);
  r.naive_worst = worst_case(r.naive.h, tuples, cache, cost, workers);
  r.no_action_worst = worst_case(r.zero, tuples, cache, cost, workers);
  r.rounded = round_integral(r.robust.h, config.deployment);
  r.rounded_worst = worst_case(r.rounded, tuples, cache, cost, workers);

  r.scenarios = scenario_report({{"no_action_max_cost", r.no_action_worst.tuple},
                                 {"naive_worst", r.naive_worst.tuple},
                                 {"robust_worst", r.robust_worst.tuple}},
                                {{"no_intervention", r.zero},
                                 {"robust", r.robust.h},
                                 {"naive", r.naive.h}},
                                cache, cost);
  return r;
}

std::vector<OutOfSampleRow> run_out_of_sample(const DeploymentVector& h,
                                              const ExperimentConfig& config,
                                              const std::vector<ContagionTuple>& tuples) {
  const DayCost cost = config.make_cost();
  ScenarioCache cache(config.epidemic, config.deployment);
  check_feasible(h, config.deployment);
  cache.prepare(tuples, config.solver.workers);
  const DeploymentVector zero(h.size());
  std::vector<OutOfSampleRow> rows;
  for (const auto& t : tuples) {
    const PlannerView& view = cache.at(t);
    rows.push_back({t, view.declaration_day, evaluate_cost(h, view, cost, config.deployment),
                    evaluate_cost(zero, view, cost, config.deployment)});
  }
  return rows;
}

std::vector<CostBenefitRow> run_cost_benefit(const ExperimentConfig& config,
                                             const std::vector<double>& budgets) {
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0)) throw ConfigError("cost-benefit budgets must be positive");
    if (i > 0 && budgets[i] < budgets[i - 1]) {
      throw ConfigError("cost-benefit budgets must be sorted ascending");
    }
  }
  std::vector<CostBenefitRow> robust_rows, naive_rows;
  for (double b : budgets) {
    ExperimentConfig cfg = config;
    cfg.deployment.total_budget = b;
    const SolveResult r = run_solve(cfg);
    const DayCost cost = cfg.make_cost();
    ScenarioCache cache(cfg.epidemic, cfg.deployment);
    auto row_for = [&](const std::string& name, const DeploymentVector& h, const WorstCase& wc) {
      const PlannerView& view = cache.view(wc.tuple);
      const LoadSummary with = summarize(h, view, cost, cfg.deployment);
      const LoadSummary without = summarize(r.zero, view, cost, cfg.deployment);
      CostBenefitRow row;
      row.budget = b;
      row.policy = name;
      row.staff_used = h.total();
      row.worst_tuple = wc.tuple;
      row.worst_cost = wc.value;
      row.no_intervention_cost = without.cost;
      row.peak_load = with.peak;
      row.peak_load_no_intervention = without.peak;
      row.stressed_days = with.stressed;
      row.stressed_days_no_intervention = without.stressed;
      return row;
    };
    robust_rows.push_back(row_for("robust", r.robust.h, r.robust_worst));
    naive_rows.push_back(row_for("naive", r.naive.h, r.naive_worst));
  }
  auto add_marginals = [](std::vector<CostBenefitRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double db = rows[i].budget - rows[i - 1].budget;
      if (db > 0) rows[i].marginal = -(rows[i].worst_cost - rows[i - 1].worst_cost) / db;
    }
  };
  add_marginals(robust_rows);
  add_marginals(naive_rows);
  robust_rows.insert(robust_rows.end(), naive_rows.begin(), naive_rows.end());
  return robust_rows;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = grid_point(lo, hi, i, count - 1);
  return v;
}

std::vector<PScanRow> run_p_scan(const ExperimentConfig& config,
                                 const std::vector<NamedPolicy>& policies,
                                 const std::vector<double>& p_grid) {
  const DayCost cost = config.make_cost();
  ScenarioCache cache(config.epidemic, config.deployment);
  std::vector<ContagionTuple> tuples;
  for (double p : p_grid) tuples.push_back({p, p, config.uncertainty.change_first});
  cache.prepare(tuples, config.solver.workers);
  std::vector<PScanRow> rows;
  for (const auto& t : tuples) {
    const PlannerView& view = cache.at(t);
    for (const auto& pol : policies) {
      rows.push_back({t.p1, pol.name, evaluate_cost(pol.h, view, cost, config.deployment)});
    }
  }
  return rows;
}

}  // namespace surge::lab
