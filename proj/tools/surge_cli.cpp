// surge: robust surge-staff planning from the command line.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "surge/lab/config.hpp"
#include "surge/lab/experiments.hpp"
#include "surge/lab/reports.hpp"

namespace fs = std::filesystem;
using namespace surge;
using namespace surge::lab;

namespace {

struct Globals {
  int workers = 0;  // 0: keep the config value
  unsigned seed = 0;
  std::string out_dir;
};

std::string default_out_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("SURGE_OUT_DIR"); env && *env) return env;
  return cfg.output.directory;
}

ExperimentConfig load(const std::string& path, const Globals& g) {
  ExperimentConfig cfg = load_config(path);
  if (g.workers > 0) cfg.solver.workers = g.workers;
  return cfg;
}

fs::path out_dir(const ExperimentConfig& cfg, const Globals& g) {
  return g.out_dir.empty() ? fs::path(default_out_dir(cfg)) : fs::path(g.out_dir);
}

// "a:b:step" or "a,b,c".
std::vector<int> parse_days(const std::string& spec) {
  std::vector<int> out;
  if (spec.find(':') != std::string::npos) {
    int a = 0, b = 0, step = 1;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    in >> a >> c1 >> b;
    if (in >> c2) in >> step;
    if (!in.eof() && in.fail()) throw CLI::ValidationError("--days", "expected a:b[:step]");
    if (step < 1 || b < a) throw CLI::ValidationError("--days", "expected a <= b and step >= 1");
    for (int d = a; d <= b; d += step) out.push_back(d);
    return out;
  }
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::string tuple_text(const ContagionTuple& t) {
  return "(" + format_number(t.p1) + ", " + format_number(t.p2) + ", " +
         std::to_string(t.change_day) + ")";
}

int cmd_validate(const std::string& config, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  std::cout << describe(cfg);
  std::cout << "ok\n";
  return 0;
}

int cmd_solve(const std::string& config, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  std::cerr << describe(cfg);
  const SolveResult r = run_solve(cfg);
  const fs::path dir = out_dir(cfg, g);
  emit_reports(r, cfg, dir);
  std::cout << "robust worst-case cost " << format_number(r.robust_worst.value) << " at "
            << tuple_text(r.robust_worst.tuple) << ", staff " << format_number(r.robust.h.total())
            << "\n";
  std::cout << "bounds [" << format_number(r.robust.lower) << ", "
            << format_number(r.robust.worst_value) << "], gap " << format_number(r.robust.gap)
            << (r.robust.converged ? "" : " (iteration cap reached)") << ", iterations "
            << r.log.size() << "\n";
  std::cout << "integral policy worst-case cost " << format_number(r.rounded_worst.value)
            << ", staff " << format_number(r.rounded.total()) << "\n";
  std::cout << "naive worst-case cost " << format_number(r.naive_worst.value) << " at "
            << tuple_text(r.naive_worst.tuple) << "\n";
  std::cout << "no-intervention worst-case cost " << format_number(r.no_action_worst.value)
            << " at " << tuple_text(r.no_action_worst.tuple) << "\n";
  std::cout << "reports written to " << dir.string() << "\n";
  return r.robust.converged ? 0 : 3;
}

int cmd_evaluate(const std::string& config, const std::string& policy, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  const DeploymentVector h = read_policy_csv(policy, cfg.deployment);
  const WorstCase wc = evaluate_policy(cfg, h);
  std::cout << "worst-case cost " << format_number(wc.value) << " at " << tuple_text(wc.tuple)
            << " over " << wc.evaluations << " tuples\n";
  return 0;
}

int cmd_oos(const std::string& config, const std::string& policy, double p1,
            const std::vector<double>& p2s, const std::string& days, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  const DeploymentVector h = read_policy_csv(policy, cfg.deployment);
  double first = p1;
  if (!(first > 0)) first = evaluate_policy(cfg, h).tuple.p1;
  std::vector<ContagionTuple> tuples;
  for (double p2 : p2s) {
    for (int d : parse_days(days)) tuples.push_back({first, p2, d});
  }
  const auto rows = run_out_of_sample(h, cfg, tuples);
  const fs::path dir = out_dir(cfg, g);
  write_out_of_sample_csv(dir / "out_of_sample.csv", rows);
  for (const auto& r : rows) {
    std::cout << tuple_text(r.tuple) << " policy " << format_number(r.policy_cost)
              << " no-intervention " << format_number(r.no_intervention_cost) << "\n";
  }
  return 0;
}

int cmd_cost_benefit(const std::string& config, const std::vector<double>& budgets,
                     const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  const auto rows = run_cost_benefit(cfg, budgets);
  const fs::path dir = out_dir(cfg, g);
  write_cost_benefit_csv(dir / "cost_benefit.csv", rows);
  for (const auto& r : rows) {
    std::cout << r.policy << " budget " << format_number(r.budget) << " worst-case cost "
              << format_number(r.worst_cost) << " peak " << format_number(r.peak_load)
              << " stressed days " << r.stressed_days << "\n";
  }
  return 0;
}

int cmd_p_scan(const std::string& config, const std::vector<std::string>& policies, double lo,
               double hi, int count, const Globals& g) {
  const ExperimentConfig cfg = load(config, g);
  std::vector<NamedPolicy> named = {
      {"no_intervention", DeploymentVector(static_cast<std::size_t>(cfg.deployment.planner_horizon))}};
  for (const auto& spec : policies) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--policy", "expected name=path");
    named.push_back({spec.substr(0, eq), read_policy_csv(spec.substr(eq + 1), cfg.deployment)});
  }
  const auto rows = run_p_scan(cfg, named, linear_grid(lo, hi, count));
  const fs::path dir = out_dir(cfg, g);
  write_p_scan_csv(dir / "p_scan.csv", rows);
  for (const auto& r : rows) {
    std::cout << format_number(r.p) << " " << r.policy << " " << format_number(r.cost) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust surge-staff deployment planner"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--workers", g.workers, "Concurrent oracle workers (overrides the config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed,
                 "Recorded for provenance; every computation is deterministic");
  app.add_option("--out-dir", g.out_dir,
                 "Output directory (default: $SURGE_OUT_DIR, else the config's output.directory)");

  std::string config;
  std::string policy;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  };

  auto* validate = app.add_subcommand("validate-config", "Check a config and echo its contents");
  add_config(validate);

  auto* solve = app.add_subcommand("solve", "Compute the robust policy and comparison reports");
  add_config(solve);

  auto* evaluate = app.add_subcommand("evaluate", "Worst-case cost of a policy over the grid");
  add_config(evaluate);
  evaluate->add_option("--policy", policy, "Policy CSV")->required()->check(CLI::ExistingFile);

  auto* oos = app.add_subcommand("oos", "Evaluate a policy on tuples outside the set");
  add_config(oos);
  oos->add_option("--policy", policy, "Policy CSV")->required()->check(CLI::ExistingFile);
  double oos_p1 = 0.0;
  std::vector<double> oos_p2 = {0.014, 0.015};
  std::string oos_days = "150:180:5";
  oos->add_option("--p1", oos_p1, "Initial contagion (default: the policy's worst-case p1)");
  oos->add_option("--p2", oos_p2, "Post-change contagion values")->delimiter(',');
  oos->add_option("--days", oos_days, "Change days, a:b[:step] or a,b,c");

  auto* cb = app.add_subcommand("cost-benefit", "Re-solve across staff budgets");
  add_config(cb);
  std::vector<double> budgets = {1000, 1500, 2000, 2500, 3000};
  cb->add_option("--budgets", budgets, "Budgets, ascending")->delimiter(',');

  auto* scan = app.add_subcommand("p-scan", "Cost against a constant contagion probability");
  add_config(scan);
  std::vector<std::string> scan_policies;
  double p_lo = 0.0115, p_hi = 0.0125;
  int p_count = 21;
  scan->add_option("--policy", scan_policies, "name=policy.csv (repeatable)");
  scan->add_option("--from", p_lo, "Lowest p");
  scan->add_option("--to", p_hi, "Highest p");
  scan->add_option("--count", p_count, "Grid points")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(config, g);
    if (*solve) return cmd_solve(config, g);
    if (*evaluate) return cmd_evaluate(config, policy, g);
    if (*oos) return cmd_oos(config, policy, oos_p1, oos_p2, oos_days, g);
    if (*cb) return cmd_cost_benefit(config, budgets, g);
    if (*scan) return cmd_p_scan(config, scan_policies, p_lo, p_hi, p_count, g);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
