#include "surge/robust.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace surge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// V(h | p) without the feasibility check; callers check h once.
double scenario_cost(const PlannerView& view, const DayCost& cost, const DeploymentConstraints& c,
                     std::span<const double> h) {
  if (view.days() == 0) return 0.0;
  const std::vector<double> w = workforce_series(view, c, h);
  double total = 0.0;
  for (std::size_t t = 0; t < w.size(); ++t) total += cost(w[t], view.general_infectives[t]).value;
  return total;
}

bool better(double value, const ContagionTuple& tuple, double best_value,
            const ContagionTuple& best_tuple) {
  return value > best_value || (value == best_value && tuple < best_tuple);
}

// Ledger slack for comparing bounds from independently solved LPs.
double ledger_slack(double v) { return 1e-10 * std::max(1.0, std::abs(v)); }

}  // namespace

void UncertaintySet::validate() const {
  std::ostringstream err;
  auto check_interval = [&](const char* name, double lo, double hi) {
    if (!(lo > 0 && hi < 1)) err << "  " << name << " must lie in (0, 1)\n";
    if (!(lo <= hi)) err << "  " << name << " lower bound exceeds upper bound\n";
  };
  check_interval("initial contagion interval", p_initial_lo, p_initial_hi);
  check_interval("post-change contagion interval", p_after_lo, p_after_hi);
  if (change_first < 1) err << "  change window must start on day >= 1\n";
  if (change_last < change_first) err << "  change window is empty\n";
  if (grid < 1) err << "  grid N must be >= 1\n";
  const std::string msg = err.str();
  if (!msg.empty()) throw RobustError("invalid uncertainty set:\n" + msg);
}

UncertaintySet UncertaintySet::with_grid(int n) const {
  UncertaintySet u = *this;
  u.grid = n;
  return u;
}

double grid_point(double lo, double hi, int j, int n) {
  if (j == n) return hi;
  return lo + (hi - lo) * (static_cast<double>(j) / n);
}

std::vector<ContagionTuple> enumerate_tuples(const UncertaintySet& u) {
  u.validate();
  auto axis = [&](double lo, double hi) {
    std::vector<double> v;
    if (lo == hi) return std::vector<double>{lo};
    for (int j = 0; j <= u.grid; ++j) v.push_back(grid_point(lo, hi, j, u.grid));
    return v;
  };
  const std::vector<double> a = axis(u.p_initial_lo, u.p_initial_hi);
  const std::vector<double> b = axis(u.p_after_lo, u.p_after_hi);
  std::vector<ContagionTuple> out;
  out.reserve(a.size() * b.size() * static_cast<std::size_t>(u.change_last - u.change_first + 1));
  for (double p1 : a) {
    for (double p2 : b) {
      for (int d = u.change_first; d <= u.change_last; ++d) out.push_back({p1, p2, d});
    }
  }
  return out;
}

std::size_t parallel_chunks(std::size_t n, int workers,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t k = std::max<std::size_t>(
      1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers))));
  if (k == 1) {
    fn(0, 0, n);
    return 1;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(k);
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t begin = n * w / k;
    const std::size_t end = n * (w + 1) / k;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return k;
}

ScenarioCache::ScenarioCache(SeirParams params, DeploymentConstraints constraints)
    : params_(std::move(params)), constraints_(std::move(constraints)) {
  params_.validate();
  constraints_.validate();
}

void ScenarioCache::prepare(std::span<const ContagionTuple> tuples, int workers) {
  std::vector<ContagionTuple> missing;
  for (const auto& t : tuples) {
    if (!views_.contains(t)) missing.push_back(t);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  for (const auto& t : missing) validate_tuple(t, params_.horizon);

  std::vector<PlannerView> fresh(missing.size());
  parallel_chunks(missing.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      fresh[i] = make_planner_view(simulate(params_, missing[i]), params_, constraints_);
    }
  });
  for (std::size_t i = 0; i < missing.size(); ++i) views_.emplace(missing[i], std::move(fresh[i]));
}

const PlannerView& ScenarioCache::view(const ContagionTuple& tuple) {
  auto it = views_.find(tuple);
  if (it != views_.end()) return it->second;
  validate_tuple(tuple, params_.horizon);
  return views_
      .emplace(tuple, make_planner_view(simulate(params_, tuple), params_, constraints_))
      .first->second;
}

const PlannerView& ScenarioCache::at(const ContagionTuple& tuple) const {
  auto it = views_.find(tuple);
  if (it == views_.end()) throw RobustError("tuple missing from the scenario cache");
  return it->second;
}

WorstCase worst_case(const DeploymentVector& h, std::span<const ContagionTuple> tuples,
                     const ScenarioCache& cache, const DayCost& cost, int workers) {
  if (tuples.empty()) throw RobustError("worst case over an empty tuple set");
  const DeploymentConstraints& c = cache.constraints();
  check_feasible(h, c);

  struct Best {
    double value = -1.0;
    ContagionTuple tuple;
  };
  std::vector<Best> partial(static_cast<std::size_t>(std::max(1, workers)));
  const std::size_t k = parallel_chunks(
      tuples.size(), workers, [&](std::size_t worker, std::size_t begin, std::size_t end) {
    Best b;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = scenario_cost(cache.at(tuples[i]), cost, c, h.values());
      if (b.value < 0 || better(v, tuples[i], b.value, b.tuple)) b = {v, tuples[i]};
    }
    partial[worker] = b;
  });
  Best best = partial[0];
  for (std::size_t w = 1; w < k; ++w) {
    if (partial[w].value >= 0 && better(partial[w].value, partial[w].tuple, best.value, best.tuple)) {
      best = partial[w];
    }
  }
  return {best.tuple, best.value, tuples.size()};
}

ScenarioBlock make_scenario_block(const PlannerView& view, const DayCost& cost,
                                  const DeploymentConstraints& c) {
  ScenarioBlock block;
  block.tuple = view.tuple;
  if (view.days() == 0) return block;
  const AffineWorkforce aw = affine_workforce(view, c);
  for (std::size_t t = 0; t < view.days(); ++t) {
    const PiecewiseLinearConvex f = cost.pieces(view.general_infectives[t]);
    const double base = aw.constant[t];
    const PwlValue at_zero = eval_pwl(f, base);
    const double active_slope = f.pieces[at_zero.active].slope;
    const auto row = aw.coeff.row(t);
    const bool reachable = std::any_of(row.begin(), row.end(), [](double a) { return a != 0.0; });
    // Flat at h = 0 means flat for every h >= 0 (nonincreasing convex cost).
    if (active_slope == 0.0 || !reachable) {
      block.constant += at_zero.value;
      continue;
    }
    ScenarioBlock::Day day;
    day.coeff.assign(row.begin(), row.end());
    day.regular = base;
    for (const AffinePiece& p : f.pieces) {
      if (p.slope < active_slope) continue;  // never active once omega >= c_t
      if (p.slope == 0.0 && p.intercept <= 0.0) continue;  // implied by z_t >= 0
      day.pieces.push_back(p);
    }
    block.days.push_back(std::move(day));
  }
  return block;
}

double relative_gap(double lower, double upper) {
  const double diff = upper - lower;
  if (diff <= 1e-12 * std::max(1.0, std::abs(upper))) return 0.0;
  return diff / std::max(lower, 1e-9);
}

MasterSolution solve_master(const MasterState& state, const DeploymentConstraints& c) {
  const auto width = static_cast<std::size_t>(c.planner_horizon);
  const std::size_t z = width;
  std::size_t n = width + 1;
  for (const auto& s : state.scenarios) n += s.days.size();

  LinearProgram lp(n);
  lp.cost[z] = 1.0;
  if (c.per_period_cap) {
    lp.upper.assign(n, std::nullopt);
    for (std::size_t s = 0; s < width; ++s) lp.upper[s] = *c.per_period_cap;
  }
  std::vector<double> row(n, 0.0);
  auto emit = [&](double rhs) {
    lp.add_ge(row, rhs);
    std::fill(row.begin(), row.end(), 0.0);
  };

  std::fill(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(width), 1.0);
  lp.add_le(row, c.total_budget);
  std::fill(row.begin(), row.end(), 0.0);

  for (const Cut& cut : state.cuts) {
    if (cut.gradient.size() != width) throw RobustError("cut width differs from planner horizon");
    row[z] = 1.0;
    for (std::size_t s = 0; s < width; ++s) row[s] = -cut.gradient[s];
    emit(cut.intercept);
  }
  std::size_t next = width + 1;
  for (const ScenarioBlock& sb : state.scenarios) {
    row[z] = 1.0;
    for (std::size_t t = 0; t < sb.days.size(); ++t) row[next + t] = -1.0;
    emit(sb.constant);
    for (const auto& day : sb.days) {
      for (const AffinePiece& p : day.pieces) {
        row[next] = 1.0;
        for (std::size_t s = 0; s < width; ++s) row[s] = -p.slope * day.coeff[s];
        emit(p.slope * day.regular + p.intercept);
      }
      ++next;
    }
  }

  const LpSolution sol = solve(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw RobustError("master problem not solved: " + to_string(sol.status));
  }
  MasterSolution out;
  out.h = DeploymentVector(width);
  for (std::size_t s = 0; s < width; ++s) out.h[s] = std::max(0.0, sol.x[s]);
  out.value = sol.objective;
  out.pivots = sol.pivots;
  return out;
}

namespace {

void record_evaluation(MasterState& state, const DeploymentVector& h, const WorstCase& wc) {
  if (wc.value < state.upper) {
    state.upper = wc.value;
    state.incumbent = h;
    state.incumbent_worst = wc.tuple;
  }
}

void check_ledger(const MasterState& state, double w) {
  if (w < state.lower - ledger_slack(state.lower)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "lower bound decreased: " << state.lower << " -> " << w;
    throw RobustError(msg.str());
  }
  if (w > state.upper + ledger_slack(state.upper)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "lower bound " << w << " exceeds upper bound " << state.upper;
    throw RobustError(msg.str());
  }
}

}  // namespace

void procedure_a(MasterState& state, std::span<const ContagionTuple> tuples, RobustContext& ctx,
                 int grid_label) {
  const RobustOptions& opt = ctx.options;
  if (opt.hot_start_iterations < 1) throw RobustError("hot start needs K >= 1");
  if (!(opt.hot_start_gap > 0)) throw RobustError("hot start needs epsilon > 0");
  const DeploymentConstraints& c = ctx.cache.constraints();
  ctx.cache.prepare(tuples, opt.workers);

  DeploymentVector h = state.incumbent.size() ? state.incumbent
                                              : DeploymentVector(static_cast<std::size_t>(c.planner_horizon));
  for (int r = 1; r <= opt.hot_start_iterations; ++r) {
    auto t0 = Clock::now();
    const WorstCase wc = worst_case(h, tuples, ctx.cache, ctx.cost, opt.workers);
    const double oracle_s = seconds_since(t0);
    record_evaluation(state, h, wc);

    state.scenarios.push_back(make_scenario_block(ctx.cache.at(wc.tuple), ctx.cost, c));
    t0 = Clock::now();
    const MasterSolution ms = solve_master(state, c);
    const double master_s = seconds_since(t0);
    check_ledger(state, ms.value);
    state.lower = ms.value;
    h = ms.h;

    IterationRecord rec;
    rec.phase = 'A';
    rec.grid = grid_label;
    rec.iteration = r;
    rec.tuple = wc.tuple;
    rec.value = wc.value;
    rec.lower = state.lower;
    rec.upper = state.upper;
    rec.gap = relative_gap(state.lower, state.upper);
    rec.oracle_evals = wc.evaluations;
    rec.master_pivots = ms.pivots;
    rec.oracle_seconds = oracle_s;
    rec.master_seconds = master_s;
    state.log.push_back(rec);

    if (rec.gap <= opt.hot_start_gap) break;
  }
}

RobustPolicy algorithm_b(MasterState& state, std::span<const ContagionTuple> tuples,
                         RobustContext& ctx, int grid_label) {
  const RobustOptions& opt = ctx.options;
  const DeploymentConstraints& c = ctx.cache.constraints();
  ctx.cache.prepare(tuples, opt.workers);

  RobustPolicy policy;
  for (int r = 1; r <= opt.max_iterations; ++r) {
    auto t0 = Clock::now();
    const MasterSolution ms = solve_master(state, c);
    const double master_s = seconds_since(t0);

    t0 = Clock::now();
    const WorstCase wc = worst_case(ms.h, tuples, ctx.cache, ctx.cost, opt.workers);
    const double oracle_s = seconds_since(t0);
    record_evaluation(state, ms.h, wc);
    check_ledger(state, ms.value);
    state.lower = ms.value;

    IterationRecord rec;
    rec.phase = 'B';
    rec.grid = grid_label;
    rec.iteration = r;
    rec.tuple = wc.tuple;
    rec.value = wc.value;
    rec.lower = state.lower;
    rec.upper = state.upper;
    rec.gap = relative_gap(state.lower, state.upper);
    rec.oracle_evals = wc.evaluations;
    rec.master_pivots = ms.pivots;
    rec.oracle_seconds = oracle_s;
    rec.master_seconds = master_s;
    state.log.push_back(rec);

    if (rec.gap < opt.tolerance || ms.value >= wc.value - ledger_slack(wc.value)) {
      policy.converged = true;
      break;
    }
    state.cuts.push_back(subgradient_cut(ms.h, ctx.cache.at(wc.tuple), ctx.cost, c));
  }

  policy.h = state.incumbent;
  policy.worst_tuple = state.incumbent_worst.value_or(ContagionTuple{});
  policy.worst_value = state.upper;
  policy.lower = state.lower;
  policy.gap = relative_gap(state.lower, state.upper);
  policy.log = state.log;
  return policy;
}

RefinedPolicy refine_doubling(const UncertaintySet& set, int n0, int n_max, RobustContext& ctx,
                              bool hot_start) {
  if (n0 < 1) throw RobustError("refinement needs N0 >= 1");
  if (n_max < n0) throw RobustError("refinement needs N_max >= N0");
  RefinedPolicy out;
  MasterState state;
  for (int n = n0; n <= n_max; n *= 2) {
    const std::vector<ContagionTuple> tuples = enumerate_tuples(set.with_grid(n));
    ctx.cache.prepare(tuples, ctx.options.workers);
    const std::size_t before = state.log.size();
    if (n == n0) {
      if (hot_start) procedure_a(state, tuples, ctx, n);
    } else {
      // Upper bounds from the coarser grid do not bound the finer one.
      state.upper = std::numeric_limits<double>::infinity();
      state.incumbent_worst.reset();
    }
    out.policy = algorithm_b(state, tuples, ctx, n);
    RefinementLevel level{n, out.policy.lower, out.policy.worst_value,
                          static_cast<int>(state.log.size() - before)};
    if (!out.levels.empty() && level.lower < out.levels.back().lower - ledger_slack(level.lower)) {
      throw RobustError("lower bound decreased under refinement");
    }
    out.levels.push_back(level);
    if (n > n_max / 2) break;
  }
  return out;
}

NaivePolicy naive_worst_case_policy(std::span<const ContagionTuple> tuples, RobustContext& ctx) {
  const DeploymentConstraints& c = ctx.cache.constraints();
  ctx.cache.prepare(tuples, ctx.options.workers);
  NaivePolicy out;
  const DeploymentVector zero(static_cast<std::size_t>(c.planner_horizon));
  const WorstCase wc = worst_case(zero, tuples, ctx.cache, ctx.cost, ctx.options.workers);
  out.tuple = wc.tuple;
  out.no_action_cost = wc.value;

  MasterState state;
  const PlannerView& view = ctx.cache.at(wc.tuple);
  state.scenarios.push_back(make_scenario_block(view, ctx.cost, c));
  out.h = solve_master(state, c).h;
  out.own_cost = evaluate_cost(out.h, view, ctx.cost, c);
  return out;
}

}  // namespace surge
