#include <algorithm>
#include <atomic>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "surge/robust.hpp"

using namespace surge;

namespace {

DayCost default_queueing_cost(const SeirParams& p) {
  QueueingCostSpec q;
  q.breakpoints = uniform_breakpoints(1.0, 1.1, 12);
  return queueing_cost_fn(q, initial_state(p)[1].active());
}

// A coarse slice of the first example's set: quick to solve, same physics.
UncertaintySet small_set(int grid) {
  UncertaintySet u;
  u.change_first = 140;
  u.change_last = 142;
  u.grid = grid;
  return u;
}

struct Fixture {
  SeirParams params;
  DeploymentConstraints constraints;
  DayCost cost = default_queueing_cost(params);
  ScenarioCache cache{params, constraints};
  RobustContext ctx{cache, cost, RobustOptions{}};
};

}  // namespace

TEST_CASE("tuple enumeration sizes and order") {
  UncertaintySet u;
  u.grid = 1;
  u.change_last = u.change_first;
  CHECK(enumerate_tuples(u).size() == 4);

  UncertaintySet ex1;  // N = 20, 21 change days
  CHECK(enumerate_tuples(ex1).size() == 21u * 21u * 21u);

  const auto t = enumerate_tuples(small_set(2));
  CHECK(t.size() == 3u * 3u * 3u);
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK(t.front().p1 == 0.01);
  CHECK(t.back().p2 == 0.0135);

  UncertaintySet point = small_set(5);
  point.p_initial_hi = point.p_initial_lo;
  point.p_after_hi = point.p_after_lo;
  point.change_last = point.change_first;
  CHECK(enumerate_tuples(point).size() == 1);

  UncertaintySet bad;
  bad.grid = 0;
  CHECK_THROWS_AS(enumerate_tuples(bad), RobustError);
  bad = UncertaintySet{};
  bad.p_after_lo = 0.02;
  CHECK_THROWS_AS(bad.validate(), RobustError);
}

TEST_CASE("grid points are nested under doubling") {
  for (int n : {1, 3, 10, 20}) {
    for (int j = 0; j <= n; ++j) {
      CHECK(grid_point(0.01, 0.012, j, n) == grid_point(0.01, 0.012, 2 * j, 2 * n));
    }
  }
  CHECK(grid_point(0.01, 0.012, 0, 7) == 0.01);
  CHECK(grid_point(0.01, 0.012, 7, 7) == 0.012);
}

TEST_CASE("parallel chunks cover the range exactly once") {
  for (int workers : {1, 3, 8, 50}) {
    std::vector<std::atomic<int>> hits(37);
    const std::size_t chunks = parallel_chunks(hits.size(), workers,
                                               [&](std::size_t, std::size_t b, std::size_t e) {
                                                 for (std::size_t i = b; i < e; ++i) ++hits[i];
                                               });
    CHECK(chunks >= 1);
    CHECK(chunks <= static_cast<std::size_t>(workers));
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("scenario cache lookups") {
  Fixture f;
  const ContagionTuple t{0.011, 0.013, 141};
  CHECK_THROWS_AS(f.cache.at(t), RobustError);
  const PlannerView& v = f.cache.view(t);
  CHECK(&f.cache.at(t) == &v);
  CHECK(f.cache.size() == 1);
  const auto tuples = enumerate_tuples(small_set(1));
  f.cache.prepare(tuples, 4);
  CHECK(f.cache.size() == tuples.size() + 1);
}

TEST_CASE("worst case is the exhaustive max with a lexicographic tie-break") {
  Fixture f;
  const auto tuples = enumerate_tuples(small_set(2));
  f.cache.prepare(tuples, 4);
  DeploymentVector h(150);
  for (std::size_t s = 0; s < 30; ++s) h[s] = 20.0;

  double best = -1.0;
  ContagionTuple arg;
  for (const auto& t : tuples) {
    const double v = evaluate_cost(h, f.cache.at(t), f.cost, f.constraints);
    if (v > best) {
      best = v;
      arg = t;
    }
  }
  for (int workers : {1, 2, 7}) {
    const WorstCase wc = worst_case(h, tuples, f.cache, f.cost, workers);
    CHECK(wc.value == best);
    CHECK(wc.tuple == arg);
    CHECK(wc.evaluations == tuples.size());
  }

  // A cost that never binds makes every tuple tie at zero: the first one wins.
  PiecewiseLinearConvex slack;
  slack.pieces = {{0.0, 0.0}, {-1e-6, 1e-6}};
  const WorstCase z = worst_case(h, tuples, f.cache, threshold_cost_fn(slack), 3);
  CHECK(z.value == 0.0);
  CHECK(z.tuple == tuples.front());
}

TEST_CASE("scenario block reproduces the scenario cost for any h") {
  Fixture f;
  const PlannerView& v = f.cache.view({0.012, 0.0135, 140});
  const ScenarioBlock sb = make_scenario_block(v, f.cost, f.constraints);
  CHECK(sb.days.size() <= v.days());
  std::mt19937 rng(3);
  for (int k = 0; k < 5; ++k) {
    const DeploymentVector h = surge::testing::random_deployment(rng, 150, 5.0 * k);
    double total = sb.constant;
    for (const auto& d : sb.days) {
      double w = d.regular;
      for (std::size_t s = 0; s < h.size(); ++s) w += d.coeff[s] * h[s];
      double z = 0.0;
      for (const auto& p : d.pieces) z = std::max(z, p(w));
      total += z;
    }
    CHECK(total == doctest::Approx(evaluate_cost(h, v, f.cost, f.constraints)).epsilon(1e-10));
  }
}

TEST_CASE("master problem trivial cases") {
  DeploymentConstraints c;
  c.planner_horizon = 4;
  c.total_budget = 10.0;

  MasterState empty;
  const MasterSolution e = solve_master(empty, c);
  CHECK(e.value == 0.0);

  // One cut: z >= 5 + g.h, best spent on the steepest day.
  MasterState one;
  one.cuts.push_back({{-0.1, -0.3, -0.2, 0.0}, 5.0, {}});
  const MasterSolution s = solve_master(one, c);
  CHECK(s.value == doctest::Approx(5.0 - 3.0));
  CHECK(s.h[1] == doctest::Approx(10.0));

  c.per_period_cap = 4.0;
  const MasterSolution capped = solve_master(one, c);
  CHECK(capped.value == doctest::Approx(5.0 - 0.3 * 4 - 0.2 * 4 - 0.1 * 2));
  for (std::size_t i = 0; i < 4; ++i) CHECK(capped.h[i] <= 4.0 + 1e-9);

  c.total_budget = 0.0;
  const MasterSolution none = solve_master(one, c);
  CHECK(none.value == doctest::Approx(5.0));
  CHECK(none.h.total() == doctest::Approx(0.0));

  // Two crossing cuts.
  c = DeploymentConstraints{};
  c.planner_horizon = 2;
  c.total_budget = 4.0;
  MasterState two;
  two.cuts.push_back({{-1.0, 0.0}, 4.0, {}});
  two.cuts.push_back({{0.0, -1.0}, 4.0, {}});
  const MasterSolution t = solve_master(two, c);
  CHECK(t.value == doctest::Approx(2.0));
  CHECK(t.h[0] == doctest::Approx(2.0));
}

TEST_CASE("zero budget leaves the no-action worst case") {
  Fixture f;
  f.constraints.total_budget = 0.0;
  ScenarioCache cache(f.params, f.constraints);
  RobustContext ctx{cache, f.cost, RobustOptions{}};
  const auto tuples = enumerate_tuples(small_set(1));
  MasterState state;
  const RobustPolicy pol = algorithm_b(state, tuples, ctx);
  CHECK(pol.converged);
  CHECK(pol.h.total() == 0.0);
  const WorstCase wc = worst_case(DeploymentVector(150), tuples, cache, f.cost, 1);
  CHECK(pol.worst_value == doctest::Approx(wc.value));
  CHECK(pol.lower == doctest::Approx(wc.value));
}

TEST_CASE("single tuple: robust and naive coincide") {
  Fixture f;
  f.constraints.total_budget = 500.0;
  ScenarioCache cache(f.params, f.constraints);
  RobustContext ctx{cache, f.cost, RobustOptions{}};
  UncertaintySet u = small_set(1);
  u.p_initial_hi = u.p_initial_lo = 0.0108;
  u.p_after_hi = u.p_after_lo = 0.0135;
  u.change_last = u.change_first;
  const auto tuples = enumerate_tuples(u);
  REQUIRE(tuples.size() == 1);
  MasterState state;
  procedure_a(state, tuples, ctx);
  const RobustPolicy pol = algorithm_b(state, tuples, ctx);
  const NaivePolicy naive = naive_worst_case_policy(tuples, ctx);
  CHECK(pol.converged);
  CHECK(naive.tuple == tuples[0]);
  CHECK(pol.worst_value == doctest::Approx(naive.own_cost).epsilon(1e-4));
  CHECK(naive.own_cost < naive.no_action_cost);
}

TEST_CASE("hot start with K = 1 embeds one scenario") {
  Fixture f;
  f.ctx.options.hot_start_iterations = 1;
  const auto tuples = enumerate_tuples(small_set(1));
  MasterState state;
  procedure_a(state, tuples, f.ctx);
  CHECK(state.scenarios.size() == 1);
  REQUIRE(state.log.size() == 1);
  CHECK(state.log[0].phase == 'A');
  CHECK(state.log[0].lower <= state.log[0].upper);

  f.ctx.options.hot_start_iterations = 0;
  MasterState other;
  CHECK_THROWS_AS(procedure_a(other, tuples, f.ctx), RobustError);
}

TEST_CASE("cutting plane keeps the bound ledger and converges") {
  Fixture f;
  f.constraints.total_budget = 800.0;
  ScenarioCache cache(f.params, f.constraints);
  RobustContext ctx{cache, f.cost, RobustOptions{}};
  ctx.options.workers = 4;
  const auto tuples = enumerate_tuples(small_set(2));
  MasterState state;
  procedure_a(state, tuples, ctx);
  const RobustPolicy pol = algorithm_b(state, tuples, ctx);
  CHECK(pol.converged);
  CHECK(pol.gap < 1e-4);
  for (std::size_t i = 0; i < pol.log.size(); ++i) {
    const auto& r = pol.log[i];
    CAPTURE(i);
    CHECK(r.lower <= r.upper + 1e-10 * std::max(1.0, r.upper));
    if (i > 0) {
      CHECK(r.lower >= pol.log[i - 1].lower - 1e-10 * std::max(1.0, r.lower));
      CHECK(r.upper <= pol.log[i - 1].upper);
    }
  }
  CHECK(pol.h.total() <= 800.0 + 1e-6);
  const WorstCase check = worst_case(pol.h, tuples, cache, f.cost, 2);
  CHECK(check.value == doctest::Approx(pol.worst_value));

  // The cut pool carries over: a second pass certifies on its first iteration.
  const std::size_t cuts = state.cuts.size();
  const RobustPolicy again = algorithm_b(state, tuples, ctx);
  CHECK(again.converged);
  CHECK(again.log.size() == pol.log.size() + 1);
  CHECK(state.cuts.size() == cuts);
}

TEST_CASE("refinement lower bounds never decrease") {
  Fixture f;
  f.constraints.total_budget = 800.0;
  ScenarioCache cache(f.params, f.constraints);
  RobustContext ctx{cache, f.cost, RobustOptions{}};
  ctx.options.workers = 4;
  const RefinedPolicy r = refine_doubling(small_set(1), 1, 4, ctx, true);
  REQUIRE(r.levels.size() == 3);
  CHECK(r.levels[0].grid == 1);
  CHECK(r.levels[2].grid == 4);
  for (std::size_t i = 1; i < r.levels.size(); ++i) {
    CHECK(r.levels[i].lower >= r.levels[i - 1].lower - 1e-10);
  }
  CHECK(r.policy.log.front().phase == 'A');
  CHECK_THROWS_AS(refine_doubling(small_set(1), 4, 2, ctx, false), RobustError);
}

TEST_CASE("relative gap") {
  CHECK(relative_gap(1.0, 1.0) == 0.0);
  CHECK(relative_gap(2.0, 2.2) == doctest::Approx(0.1));
  CHECK(relative_gap(0.0, 0.0) == 0.0);
  CHECK(relative_gap(0.0, 1.0) > 1.0);
}
