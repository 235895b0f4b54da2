#include "surge/lab/reports.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace surge::lab {

namespace {

using nlohmann::ordered_json;

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw ReportError("cannot write " + path.string());
  }

  CsvWriter& operator<<(const std::string& cell) { return put(cell); }
  CsvWriter& operator<<(const char* cell) { return put(cell); }
  CsvWriter& operator<<(double v) { return put(format_number(v)); }
  CsvWriter& operator<<(int v) { return put(std::to_string(v)); }
  CsvWriter& operator<<(long v) { return put(std::to_string(v)); }
  CsvWriter& operator<<(std::size_t v) { return put(std::to_string(v)); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

  ~CsvWriter() {
    out_.flush();
  }

 private:
  CsvWriter& put(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }

  std::filesystem::path path_;
  std::ofstream out_;
  bool first_ = true;
};

std::string day_or_empty(const std::optional<int>& d) { return d ? std::to_string(*d) : ""; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError("cannot write " + path.string());
  out << text;
  if (!out) throw ReportError("write failed: " + path.string());
}

ordered_json tuple_json(const ContagionTuple& t) {
  return ordered_json{{"p1", t.p1}, {"p2", t.p2}, {"change_day", t.change_day}};
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

void write_policy_csv(const std::filesystem::path& path, const DeploymentVector& h,
                      const DeploymentConstraints& c) {
  CsvWriter w(path);
  w << "relative_day" << "callup";
  w.end_row();
  for (std::size_t s = 0; s < h.size(); ++s) {
    w << static_cast<int>(s) + 1 + c.start_offset << h[s];
    w.end_row();
  }
}

DeploymentVector read_policy_csv(const std::filesystem::path& path,
                                 const DeploymentConstraints& c) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "relative_day,callup") {
    throw ReportError(path.string() + ":1: expected header relative_day,callup");
  }
  DeploymentVector h(static_cast<std::size_t>(c.planner_horizon));
  std::size_t count = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (comma == std::string::npos) throw ReportError(where + "expected two columns");
    char* end = nullptr;
    const long day = std::strtol(line.c_str(), &end, 10);
    if (end != line.c_str() + comma) throw ReportError(where + "bad relative_day");
    const char* value_start = line.c_str() + comma + 1;
    const double value = std::strtod(value_start, &end);
    if (end == value_start || *end != '\0') throw ReportError(where + "bad callup value");
    const long s = day - 1 - c.start_offset;
    if (s < 0 || s >= c.planner_horizon) throw ReportError(where + "relative_day out of range");
    if (s != static_cast<long>(count)) throw ReportError(where + "relative days must be consecutive");
    h[static_cast<std::size_t>(s)] = value;
    ++count;
  }
  if (count != static_cast<std::size_t>(c.planner_horizon)) {
    throw ReportError(path.string() + ": expected " + std::to_string(c.planner_horizon) +
                      " rows, found " + std::to_string(count));
  }
  return h;
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<IterationRecord>& log) {
  CsvWriter w(path);
  w << "iteration" << "phase" << "grid" << "p1" << "p2" << "d" << "value" << "lower" << "upper"
    << "gap" << "oracle_evals" << "master_pivots";
  w.end_row();
  for (const auto& r : log) {
    w << r.iteration << std::string(1, r.phase) << r.grid << r.tuple.p1 << r.tuple.p2
      << r.tuple.change_day << r.value << r.lower << r.upper << r.gap << r.oracle_evals
      << r.master_pivots;
    w.end_row();
  }
}

void write_timings_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& log) {
  CsvWriter w(path);
  w << "iteration" << "phase" << "grid" << "oracle_seconds" << "master_seconds";
  w.end_row();
  for (const auto& r : log) {
    w << r.iteration << std::string(1, r.phase) << r.grid << r.oracle_seconds << r.master_seconds;
    w.end_row();
  }
}

void write_scenarios_csv(const std::filesystem::path& path, const std::vector<ScenarioRow>& rows) {
  CsvWriter w(path);
  w << "scenario" << "policy" << "p1" << "p2" << "d" << "declaration_day" << "cost" << "peak_load"
    << "stressed_days";
  w.end_row();
  for (const auto& r : rows) {
    w << r.scenario << r.policy << r.tuple.p1 << r.tuple.p2 << r.tuple.change_day
      << day_or_empty(r.declaration_day) << r.cost << r.peak_load << r.stressed_days;
    w.end_row();
  }
}

void write_out_of_sample_csv(const std::filesystem::path& path,
                             const std::vector<OutOfSampleRow>& rows) {
  CsvWriter w(path);
  w << "p1" << "p2" << "d" << "declaration_day" << "policy_cost" << "no_intervention_cost";
  w.end_row();
  for (const auto& r : rows) {
    w << r.tuple.p1 << r.tuple.p2 << r.tuple.change_day << day_or_empty(r.declaration_day)
      << r.policy_cost << r.no_intervention_cost;
    w.end_row();
  }
}

void write_cost_benefit_csv(const std::filesystem::path& path,
                            const std::vector<CostBenefitRow>& rows) {
  CsvWriter w(path);
  w << "policy" << "budget" << "staff_used" << "p1" << "p2" << "d" << "worst_cost"
    << "worst_cost_no_intervention" << "peak_load" << "peak_load_no_intervention"
    << "stressed_days" << "stressed_days_no_intervention" << "marginal_benefit";
  w.end_row();
  for (const auto& r : rows) {
    w << r.policy << r.budget << r.staff_used << r.worst_tuple.p1 << r.worst_tuple.p2
      << r.worst_tuple.change_day << r.worst_cost << r.no_intervention_cost << r.peak_load
      << r.peak_load_no_intervention << r.stressed_days << r.stressed_days_no_intervention
      << (r.marginal ? format_number(*r.marginal) : std::string());
    w.end_row();
  }
}

void write_p_scan_csv(const std::filesystem::path& path, const std::vector<PScanRow>& rows) {
  CsvWriter w(path);
  w << "p" << "policy" << "cost";
  w.end_row();
  for (const auto& r : rows) {
    w << r.p << r.policy << r.cost;
    w.end_row();
  }
}

void write_plot_json(const std::filesystem::path& path, const SolveResult& result,
                     const ExperimentConfig& config) {
  const DayCost cost = config.make_cost();
  ScenarioCache cache(config.epidemic, config.deployment);
  const std::vector<std::pair<std::string, ContagionTuple>> scenarios = {
      {"no_action_max_cost", result.no_action_worst.tuple},
      {"naive_worst", result.naive_worst.tuple},
      {"robust_worst", result.robust_worst.tuple}};
  const std::vector<NamedPolicy> policies = {
      {"no_intervention", result.zero}, {"robust", result.robust.h}, {"naive", result.naive.h}};

  ordered_json doc;
  doc["load_metric"] = cost.kind() == CostKind::kQueueing ? "rho" : "workforce";
  ordered_json list = ordered_json::array();
  for (const auto& [label, tuple] : scenarios) {
    const PlannerView& view = cache.view(tuple);
    ordered_json sc;
    sc["label"] = label;
    sc["tuple"] = tuple_json(tuple);
    sc["declaration_day"] = view.declaration_day ? ordered_json(*view.declaration_day) : ordered_json();
    ordered_json pol = ordered_json::object();
    for (const auto& p : policies) {
      ordered_json series;
      if (view.days() > 0) {
        const CostBreakdown b = evaluate_detailed(p.h, view, cost, config.deployment);
        series["load"] = b.load;
        series["workforce"] = b.workforce;
        series["day_cost"] = b.day_cost;
      } else {
        series["load"] = ordered_json::array();
        series["workforce"] = ordered_json::array();
        series["day_cost"] = ordered_json::array();
      }
      pol[p.name] = std::move(series);
    }
    sc["policies"] = std::move(pol);
    list.push_back(std::move(sc));
  }
  doc["scenarios"] = std::move(list);
  ordered_json deploy;
  deploy["robust"] = std::vector<double>(result.robust.h.values().begin(), result.robust.h.values().end());
  deploy["naive"] = std::vector<double>(result.naive.h.values().begin(), result.naive.h.values().end());
  doc["deployments"] = std::move(deploy);
  write_text(path, doc.dump(1) + "\n");
}

namespace {

ordered_json worst_json(const WorstCase& w) {
  return ordered_json{{"tuple", tuple_json(w.tuple)}, {"cost", w.value}};
}

}  // namespace

void emit_reports(const SolveResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());

  write_policy_csv(dir / "policy.csv", result.robust.h, config.deployment);
  write_policy_csv(dir / "policy_integral.csv", result.rounded, config.deployment);
  write_policy_csv(dir / "policy_naive.csv", result.naive.h, config.deployment);
  write_convergence_csv(dir / "convergence.csv", result.log);
  write_timings_csv(dir / "timings.csv", result.log);
  write_scenarios_csv(dir / "scenarios.csv", result.scenarios);
  write_plot_json(dir / "plot.json", result, config);

  ordered_json s;
  s["name"] = config.name;
  s["grid"] = result.levels.empty() ? 0 : result.levels.back().grid;
  s["converged"] = result.robust.converged;
  s["lower_bound"] = result.robust.lower;
  s["upper_bound"] = result.robust.worst_value;
  s["gap"] = result.robust.gap;
  s["iterations"] = result.log.size();
  ordered_json levels = ordered_json::array();
  for (const auto& l : result.levels) {
    levels.push_back({{"grid", l.grid}, {"lower", l.lower}, {"upper", l.upper},
                      {"iterations", l.iterations}});
  }
  s["refinement"] = std::move(levels);
  s["robust"] = worst_json(result.robust_worst);
  s["robust"]["staff"] = result.robust.h.total();
  s["robust_integral"] = worst_json(result.rounded_worst);
  s["robust_integral"]["staff"] = result.rounded.total();
  s["naive"] = worst_json(result.naive_worst);
  s["naive"]["staff"] = result.naive.h.total();
  s["naive"]["target_tuple"] = tuple_json(result.naive.tuple);
  s["no_intervention"] = worst_json(result.no_action_worst);
  write_text(dir / "summary.json", s.dump(1) + "\n");
}

const std::vector<std::string>& deterministic_report_files() {
  static const std::vector<std::string> files = {
      "policy.csv", "policy_integral.csv", "policy_naive.csv", "convergence.csv",
      "scenarios.csv", "plot.json", "summary.json"};
  return files;
}

}  // namespace surge::lab
