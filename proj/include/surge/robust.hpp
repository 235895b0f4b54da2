#pragma once

// Min-max deployment over a discretized set of contagion tuples.
//
// The adversary picks (p1, p2, d) from a grid; the planner picks h. The
// worst-case oracle is an exhaustive scan over the grid. The master problem
// holds Benders-style cuts and, optionally, whole scenarios embedded through
// their affine workforce map (state eliminated), and is solved by `simplex`.

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surge/cost.hpp"
#include "surge/epidemic.hpp"
#include "surge/simplex.hpp"
#include "surge/staffing.hpp"

namespace surge {

class RobustError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UncertaintySet {
  double p_initial_lo = 0.01;
  double p_initial_hi = 0.012;
  double p_after_lo = 0.0125;
  double p_after_hi = 0.0135;
  int change_first = 140;  // absolute days, inclusive
  int change_last = 160;
  int grid = 20;           // N

  void validate() const;
  /// Same set with a different N.
  UncertaintySet with_grid(int n) const;
};

/// Grid value j of N on [lo, hi]; exact at both ends and nested under doubling.
double grid_point(double lo, double hi, int j, int n);

/// Cartesian product in lexicographic order (p1, p2, d).
std::vector<ContagionTuple> enumerate_tuples(const UncertaintySet& u);

/// Runs fn(worker, begin, end) over [0, n) split into contiguous chunks, one
/// per worker. Returns the number of chunks used.
std::size_t parallel_chunks(std::size_t n, int workers,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Planner views keyed by tuple. Filling is parallel; lookups are read-only
/// and safe to share between threads once prepared.
class ScenarioCache {
 public:
  ScenarioCache(SeirParams params, DeploymentConstraints constraints);

  void prepare(std::span<const ContagionTuple> tuples, int workers);
  /// Simulates on a miss. Not for concurrent use.
  const PlannerView& view(const ContagionTuple& tuple);
  /// Throws RobustError on a miss.
  const PlannerView& at(const ContagionTuple& tuple) const;

  std::size_t size() const { return views_.size(); }
  const SeirParams& params() const { return params_; }
  const DeploymentConstraints& constraints() const { return constraints_; }

 private:
  SeirParams params_;
  DeploymentConstraints constraints_;
  std::map<ContagionTuple, PlannerView> views_;
};

struct WorstCase {
  ContagionTuple tuple;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Exhaustive max of V(h | p) over `tuples` (all must be prepared in the
/// cache). Ties go to the lexicographically smallest tuple.
WorstCase worst_case(const DeploymentVector& h, std::span<const ContagionTuple> tuples,
                     const ScenarioCache& cache, const DayCost& cost, int workers);

/// Scenario block: z >= constant + sum_t z_t with z_t >= slope_i (c_t + A_t h) + k_i.
/// Only pieces reachable for some h >= 0 are kept; days that cost nothing at
/// h = 0 are dropped, days untouched by any cohort fold into the constant.
struct ScenarioBlock {
  ContagionTuple tuple;
  double constant = 0.0;
  struct Day {
    std::vector<double> coeff;        // A_t
    double regular = 0.0;             // c_t
    std::vector<AffinePiece> pieces;  // in omega
  };
  std::vector<Day> days;
};

ScenarioBlock make_scenario_block(const PlannerView& view, const DayCost& cost,
                                  const DeploymentConstraints& c);

struct IterationRecord {
  char phase = 'B';  // 'A' hot start, 'B' cutting plane, 'N' naive
  int grid = 0;
  int iteration = 0;
  ContagionTuple tuple;  // worst tuple found this iteration
  double value = 0.0;    // V(h^r | tuple)
  double lower = 0.0;    // W
  double upper = 0.0;    // best V so far
  double gap = 0.0;
  std::size_t oracle_evals = 0;
  long master_pivots = 0;
  double oracle_seconds = 0.0;
  double master_seconds = 0.0;
};

/// Relative gap (upper - lower) / max(lower, floor), clamped at 0.
double relative_gap(double lower, double upper);

struct MasterState {
  std::vector<Cut> cuts;
  std::vector<ScenarioBlock> scenarios;
  DeploymentVector incumbent;
  double lower = 0.0;  // W, latest master value
  double upper = std::numeric_limits<double>::infinity();  // best V over iterates
  std::optional<ContagionTuple> incumbent_worst;
  std::vector<IterationRecord> log;
};

struct MasterSolution {
  DeploymentVector h;
  double value = 0.0;
  long pivots = 0;
};

/// min z over h in H subject to every cut and scenario block in the state.
MasterSolution solve_master(const MasterState& state, const DeploymentConstraints& c);

struct RobustOptions {
  int workers = 1;
  double tolerance = 1e-4;   // relative gap for the cutting-plane stop
  int max_iterations = 40;   // cutting-plane iterations per grid level
  int hot_start_iterations = 10;  // K
  double hot_start_gap = 0.05;    // epsilon
};

/// Everything the loops need besides the tuple grid.
struct RobustContext {
  ScenarioCache& cache;
  const DayCost& cost;
  RobustOptions options;
};

/// Hot start: embed whole worst-case scenarios until the bound gap falls
/// below epsilon or K are embedded.
void procedure_a(MasterState& state, std::span<const ContagionTuple> tuples, RobustContext& ctx,
                 int grid_label = 0);

struct RobustPolicy {
  DeploymentVector h;
  ContagionTuple worst_tuple;
  double worst_value = 0.0;  // certified upper bound
  double lower = 0.0;        // certified lower bound
  double gap = 0.0;
  bool converged = false;
  std::vector<IterationRecord> log;
};

/// Cutting-plane loop. Throws RobustError if the bound ledger is violated.
RobustPolicy algorithm_b(MasterState& state, std::span<const ContagionTuple> tuples,
                         RobustContext& ctx, int grid_label = 0);

struct RefinementLevel {
  int grid = 0;
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
};

struct RefinedPolicy {
  RobustPolicy policy;  // at the finest grid
  std::vector<RefinementLevel> levels;
};

/// Solves at N0, 2 N0, ... <= N_max with the cut pool carried forward. When
/// hot_start is set, Procedure A runs once on the coarsest grid.
RefinedPolicy refine_doubling(const UncertaintySet& set, int n0, int n_max, RobustContext& ctx,
                              bool hot_start);

struct NaivePolicy {
  DeploymentVector h;
  ContagionTuple tuple;       // the no-action worst tuple
  double no_action_cost = 0.0;
  double own_cost = 0.0;      // cost of h on its own tuple
};

/// Worst tuple at h = 0, then the single-scenario optimum against it.
NaivePolicy naive_worst_case_policy(std::span<const ContagionTuple> tuples, RobustContext& ctx);

}  // namespace surge
