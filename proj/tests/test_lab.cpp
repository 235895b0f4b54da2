#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "surge/lab/config.hpp"
#include "surge/lab/experiments.hpp"
#include "surge/lab/reports.hpp"

using namespace surge;
using namespace surge::lab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json example(const char* name) {
  std::ifstream in(surge::testing::source_path(std::string("configs/") + name));
  return json::parse(in, nullptr, true, true);
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc.dump());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("surge_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("example configs load with their stated values") {
  const ExperimentConfig a = load_config(surge::testing::source_path("configs/example1.json"));
  CHECK(a.name == "example1");
  CHECK(a.cost_model == CostModel::kQueueing);
  CHECK(a.queueing.breakpoints.size() == 12);
  CHECK(a.deployment.total_budget == 3000.0);
  CHECK(a.uncertainty.change_first == 140);
  CHECK(a.solver.grid_start == 20);
  CHECK(a.baseline_workforce() == 20000.0);
  CHECK(describe(a).find("R0") != std::string::npos);

  const ExperimentConfig b = load_config(surge::testing::source_path("configs/example2.json"));
  CHECK_FALSE(b.epidemic.dampening_enabled);
  CHECK(b.deployment.total_budget == 2000.0);
}

TEST_CASE("missing required field is reported by path") {
  json doc = example("example1.json");
  doc["epidemic"].erase("latent_period");
  const std::string msg = error_of(doc);
  CHECK(msg.find("epidemic.latent_period") != std::string::npos);
  CHECK(msg.find("missing") != std::string::npos);
}

TEST_CASE("dampening outside (0, 1] is rejected") {
  json doc = example("example1.json");
  doc["epidemic"]["dampening"] = 1.5;
  CHECK(error_of(doc).find("theta") != std::string::npos);
}

TEST_CASE("unknown fields and wrong types are rejected together") {
  json doc = example("example1.json");
  doc["deployment"]["budget"] = 10;
  doc["solver"]["workers"] = "eight";
  const std::string msg = error_of(doc);
  CHECK(msg.find("deployment.budget: unknown field") != std::string::npos);
  CHECK(msg.find("solver.workers") != std::string::npos);
}

TEST_CASE("schema version is checked") {
  json doc = example("example1.json");
  doc["schema_version"] = 2;
  CHECK(error_of(doc).find("schema_version") != std::string::npos);
}

TEST_CASE("optional fields fall back to defaults and are listed") {
  json doc = example("example1.json");
  doc["deployment"].erase("lag");
  doc["solver"].erase("grid_max");
  const ExperimentConfig c = parse_config(doc.dump());
  CHECK(c.deployment.lag == 1);
  CHECK(c.solver.grid_max == c.solver.grid_start);
  CHECK(std::find(c.defaults_applied.begin(), c.defaults_applied.end(), "deployment.lag") !=
        c.defaults_applied.end());
}

TEST_CASE("explicit breakpoint arrays are accepted") {
  json doc = example("example1.json");
  doc["cost"]["queueing"]["breakpoints"] = {1.0, 1.05, 1.1};
  CHECK(parse_config(doc.dump()).queueing.breakpoints.size() == 3);
  doc["cost"]["queueing"]["breakpoints"] = {1.1, 1.0};
  CHECK_FALSE(error_of(doc).empty());
}

TEST_CASE("format_number round-trips") {
  for (double x : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e-7}) {
    CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3000.0) == "3000");
}

TEST_CASE("policy CSV round trip and diagnostics") {
  const fs::path dir = scratch_dir("policy");
  DeploymentConstraints c;
  c.planner_horizon = 5;
  c.start_offset = 2;
  const DeploymentVector h({1.5, 0.0, 1.0 / 3.0, 7.0, 0.25});
  write_policy_csv(dir / "p.csv", h, c);
  CHECK(read_policy_csv(dir / "p.csv", c) == h);

  std::ifstream in(dir / "p.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "relative_day,callup");
  CHECK(first == "3,1.5");

  write_file(dir / "short.csv", "relative_day,callup\n3,1\n4,2\n");
  CHECK_THROWS_WITH_AS(read_policy_csv(dir / "short.csv", c), doctest::Contains("expected 5 rows"),
                       ReportError);
  write_file(dir / "gap.csv", "relative_day,callup\n3,1\n5,2\n");
  CHECK_THROWS_WITH_AS(read_policy_csv(dir / "gap.csv", c), doctest::Contains(":3:"), ReportError);
  write_file(dir / "bad.csv", "relative_day,callup\n3,abc\n");
  CHECK_THROWS_WITH_AS(read_policy_csv(dir / "bad.csv", c), doctest::Contains("bad callup"),
                       ReportError);
  write_file(dir / "hdr.csv", "day,value\n");
  CHECK_THROWS_AS(read_policy_csv(dir / "hdr.csv", c), ReportError);
}

TEST_CASE("integral rounding keeps the total within budget and cap") {
  DeploymentConstraints c;
  c.planner_horizon = 4;
  c.total_budget = 10.0;
  const DeploymentVector r = round_integral(DeploymentVector({2.6, 3.3, 1.4, 2.7}), c);
  CHECK(r == DeploymentVector({3.0, 3.0, 1.0, 3.0}));
  CHECK(r.total() == 10.0);

  c.total_budget = 9.5;
  const DeploymentVector b = round_integral(DeploymentVector({4.5, 4.5, 0.5, 0.0}), c);
  CHECK(b.total() <= 9.0);
  CHECK(b[0] == 5.0);  // ties go to the earlier day

  c.total_budget = 100.0;
  c.per_period_cap = 3.0;
  const DeploymentVector d = round_integral(DeploymentVector({2.9, 2.8, 0.2, 0.1}), c);
  for (std::size_t s = 0; s < 4; ++s) CHECK(d[s] <= 3.0);
  CHECK(d.total() == 6.0);
}

TEST_CASE("linear grid") {
  const auto g = linear_grid(0.0115, 0.0125, 21);
  REQUIRE(g.size() == 21);
  CHECK(g.front() == 0.0115);
  CHECK(g.back() == 0.0125);
  CHECK(linear_grid(1.0, 2.0, 1) == std::vector<double>{1.0});
  CHECK_THROWS_AS(linear_grid(1.0, 2.0, 0), ConfigError);
}

TEST_CASE("cost-benefit budgets must be positive and ascending") {
  const ExperimentConfig cfg = load_config(surge::testing::source_path("configs/example1.json"));
  CHECK_THROWS_AS(run_cost_benefit(cfg, {1000.0, 500.0}), ConfigError);
  CHECK_THROWS_AS(run_cost_benefit(cfg, {0.0}), ConfigError);
}

TEST_CASE("small solve writes consistent reports") {
  json doc = example("example1.json");
  doc["uncertainty"]["grid"] = 1;
  doc["uncertainty"]["change_days"] = {140, 141};
  doc["solver"]["grid_max"] = 2;
  doc["solver"]["workers"] = 2;
  const ExperimentConfig cfg = parse_config(doc.dump());
  const SolveResult r = run_solve(cfg);
  CHECK(r.robust.converged);
  REQUIRE(r.levels.size() == 2);
  CHECK(r.robust_worst.value <= r.naive_worst.value + 1e-12);
  CHECK(r.naive_worst.value <= r.no_action_worst.value + 1e-12);
  CHECK(r.rounded.total() <= cfg.deployment.total_budget);
  CHECK(r.scenarios.size() == 9);

  const fs::path dir = scratch_dir("solve");
  emit_reports(r, cfg, dir);
  for (const auto& name : deterministic_report_files()) CHECK(fs::exists(dir / name));
  CHECK(fs::exists(dir / "timings.csv"));

  // One convergence row per logged iteration, plus the header.
  std::ifstream conv(dir / "convergence.csv");
  std::string line;
  int rows = -1;
  while (std::getline(conv, line)) ++rows;
  CHECK(rows == static_cast<int>(r.log.size()));

  CHECK(read_policy_csv(dir / "policy.csv", cfg.deployment) == r.robust.h);
  std::ifstream summary(dir / "summary.json");
  const json s = json::parse(summary);
  CHECK(s.is_object());
}
