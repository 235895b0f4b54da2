#include "surge/lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace surge::lab {

namespace {

using nlohmann::json;

struct Diagnostics {
  std::vector<std::string> errors;
  std::vector<std::string> defaults;
};

enum class Need { kRequired, kOptional };

// One JSON object under validation. Tracks which keys were consumed so that
// anything left over is reported as unknown.
class Section {
 public:
  Section(const json* obj, std::string path, Diagnostics& diag)
      : obj_(obj), path_(std::move(path)), diag_(diag) {}

  bool present() const { return obj_ != nullptr; }

  Section child(const std::string& key, Need need) {
    const json* v = take(key, need);
    if (v && !v->is_object()) {
      error(key, "expected an object");
      v = nullptr;
    }
    return Section(v, join(key), diag_);
  }

  void number(const std::string& key, double& out, Need need) {
    read(key, need, [&](const json& v) {
      if (!v.is_number()) return fail(key, "expected a number");
      out = v.get<double>();
      return true;
    });
  }

  void integer(const std::string& key, int& out, Need need) {
    read(key, need, [&](const json& v) {
      if (!v.is_number_integer()) return fail(key, "expected an integer");
      out = v.get<int>();
      return true;
    });
  }

  void boolean(const std::string& key, bool& out, Need need) {
    read(key, need, [&](const json& v) {
      if (!v.is_boolean()) return fail(key, "expected true or false");
      out = v.get<bool>();
      return true;
    });
  }

  void string(const std::string& key, std::string& out, Need need) {
    read(key, need, [&](const json& v) {
      if (!v.is_string()) return fail(key, "expected a string");
      out = v.get<std::string>();
      return true;
    });
  }

  void pair(const std::string& key, std::array<double, 2>& out, Need need) {
    read(key, need, [&](const json& v) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        return fail(key, "expected a two-element number array");
      }
      out = {v[0].get<double>(), v[1].get<double>()};
      return true;
    });
  }

  void int_pair(const std::string& key, std::array<int, 2>& out, Need need) {
    read(key, need, [&](const json& v) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
          !v[1].is_number_integer()) {
        return fail(key, "expected a two-element integer array");
      }
      out = {v[0].get<int>(), v[1].get<int>()};
      return true;
    });
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    read(key, Need::kOptional, [&](const json& v) {
      if (v.is_null()) {
        out.reset();
        return true;
      }
      if (!v.is_number()) return fail(key, "expected a number or null");
      out = v.get<double>();
      return true;
    });
  }

  /// Passes the raw value to a custom reader; returns false if absent.
  template <class Fn>
  void custom(const std::string& key, Need need, Fn&& fn) {
    read(key, need, std::forward<Fn>(fn));
  }

  bool fail(const std::string& key, const std::string& what) {
    error(key, what);
    return false;
  }

  void finish() {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!used_.contains(it.key())) diag_.errors.push_back(join(it.key()) + ": unknown field");
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  Diagnostics& diagnostics() { return diag_; }

 private:
  const json* take(const std::string& key, Need need) {
    used_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    if (it == obj_->end()) {
      if (need == Need::kRequired) {
        diag_.errors.push_back(join(key) + ": required field is missing");
      } else {
        diag_.defaults.push_back(join(key));
      }
      return nullptr;
    }
    return &*it;
  }

  template <class Fn>
  void read(const std::string& key, Need need, Fn&& fn) {
    if (!obj_) {
      // Whole section absent: required fields were already reported with it.
      if (need == Need::kOptional) diag_.defaults.push_back(join(key));
      used_.insert(key);
      return;
    }
    const json* v = take(key, need);
    if (v) fn(*v);
  }

  void error(const std::string& key, const std::string& what) {
    diag_.errors.push_back(join(key) + ": " + what);
  }

  const json* obj_;
  std::string path_;
  Diagnostics& diag_;
  std::set<std::string> used_;
};

template <class Fn>
void collect(std::vector<std::string>& errors, const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    std::istringstream lines(e.what());
    std::string line;
    std::getline(lines, line);
    bool detail = false;
    while (std::getline(lines, line)) {
      const auto start = line.find_first_not_of(' ');
      if (start == std::string::npos) continue;
      errors.push_back(prefix + ": " + line.substr(start));
      detail = true;
    }
    if (!detail) errors.push_back(prefix + ": " + e.what());
  }
}

void read_epidemic(Section s, SeirParams& p) {
  s.pair("contact_rates", p.base_contact_rate, Need::kRequired);
  s.number("latent_period", p.latent_period, Need::kRequired);
  s.number("infectious_period", p.infectious_period, Need::kRequired);
  s.number("survival_fraction", p.survival_fraction, Need::kOptional);
  s.pair("population", p.population, Need::kRequired);
  s.pair("initial_infectives", p.initial_infectives, Need::kRequired);
  s.number("dampening", p.dampening, Need::kOptional);
  s.boolean("dampening_enabled", p.dampening_enabled, Need::kOptional);
  s.number("declaration_threshold", p.declaration_threshold, Need::kOptional);
  s.custom("declaration_flow", Need::kOptional, [&](const json& v) {
    if (v == "exposure") {
      p.declaration_flow = DeclarationFlow::kExposure;
    } else if (v == "onset") {
      p.declaration_flow = DeclarationFlow::kOnset;
    } else {
      return s.fail("declaration_flow", "expected \"exposure\" or \"onset\"");
    }
    return true;
  });
  s.number("dampening_off_threshold", p.dampening_off_threshold, Need::kOptional);
  s.integer("horizon", p.horizon, Need::kOptional);
  s.finish();
}

void read_cost(Section s, ExperimentConfig& cfg) {
  std::string model = "queueing";
  s.string("model", model, Need::kRequired);
  if (model == "queueing") {
    cfg.cost_model = CostModel::kQueueing;
  } else if (model == "threshold") {
    cfg.cost_model = CostModel::kThreshold;
  } else {
    s.fail("model", "expected \"queueing\" or \"threshold\"");
  }

  Section q = s.child("queueing", cfg.cost_model == CostModel::kQueueing ? Need::kRequired
                                                                           : Need::kOptional);
  QueueingCostSpec& spec = cfg.queueing;
  q.number("arrival_rate", spec.arrival_rate, Need::kRequired);
  q.number("service_rate", spec.service_rate, Need::kRequired);
  q.number("initial_occupancy", spec.initial_occupancy, Need::kRequired);
  q.number("demand_surge", spec.demand_surge, Need::kRequired);
  q.number("exp_shift", spec.exp_shift, Need::kOptional);
  bool explicit_breakpoints = false;
  q.custom("breakpoints", Need::kOptional, [&](const json& v) {
    explicit_breakpoints = true;
    if (v.is_array()) {
      for (const auto& b : v) {
        if (!b.is_number()) return q.fail("breakpoints", "expected numbers");
        spec.breakpoints.push_back(b.get<double>());
      }
      return true;
    }
    if (v.is_object()) {
      Section grid(&v, q.join("breakpoints"), q.diagnostics());
      double lo = 1.0, hi = 1.1;
      int count = 12;
      grid.number("from", lo, Need::kRequired);
      grid.number("to", hi, Need::kRequired);
      grid.integer("count", count, Need::kRequired);
      grid.finish();
      try {
        spec.breakpoints = uniform_breakpoints(lo, hi, count);
      } catch (const std::exception& e) {
        return q.fail("breakpoints", e.what());
      }
      return true;
    }
    return q.fail("breakpoints", "expected an array or {from, to, count}");
  });
  if (!explicit_breakpoints) spec.breakpoints = uniform_breakpoints(1.0, 1.1, 12);
  q.finish();

  Section t = s.child("threshold", cfg.cost_model == CostModel::kThreshold ? Need::kRequired
                                                                             : Need::kOptional);
  t.custom("pieces", Need::kRequired, [&](const json& v) {
    if (!v.is_array() || v.empty()) return t.fail("pieces", "expected a nonempty array");
    for (const auto& piece : v) {
      if (!piece.is_array() || piece.size() != 2 || !piece[0].is_number() ||
          !piece[1].is_number()) {
        return t.fail("pieces", "each piece must be [slope, intercept]");
      }
      cfg.threshold.pieces.push_back({piece[0].get<double>(), piece[1].get<double>()});
    }
    return true;
  });
  t.finish();
  s.finish();
}

void read_deployment(Section s, DeploymentConstraints& c) {
  s.number("total_budget", c.total_budget, Need::kRequired);
  s.integer("service_days", c.service_days, Need::kOptional);
  s.integer("lag", c.lag, Need::kOptional);
  s.optional_number("per_period_cap", c.per_period_cap);
  s.integer("planner_horizon", c.planner_horizon, Need::kOptional);
  s.integer("start_offset", c.start_offset, Need::kOptional);
  s.finish();
}

void read_uncertainty(Section s, UncertaintySet& u) {
  std::array<double, 2> p1{u.p_initial_lo, u.p_initial_hi};
  std::array<double, 2> p2{u.p_after_lo, u.p_after_hi};
  std::array<int, 2> days{u.change_first, u.change_last};
  s.pair("p_initial", p1, Need::kRequired);
  s.pair("p_after", p2, Need::kRequired);
  s.int_pair("change_days", days, Need::kRequired);
  s.integer("grid", u.grid, Need::kOptional);
  s.finish();
  u.p_initial_lo = p1[0];
  u.p_initial_hi = p1[1];
  u.p_after_lo = p2[0];
  u.p_after_hi = p2[1];
  u.change_first = days[0];
  u.change_last = days[1];
}

void read_solver(Section s, SolverSettings& v) {
  s.integer("grid_start", v.grid_start, Need::kOptional);
  s.integer("grid_max", v.grid_max, Need::kOptional);
  s.number("tolerance", v.tolerance, Need::kOptional);
  s.integer("max_iterations", v.max_iterations, Need::kOptional);
  s.boolean("hot_start", v.hot_start, Need::kOptional);
  s.integer("hot_start_iterations", v.hot_start_iterations, Need::kOptional);
  s.number("hot_start_gap", v.hot_start_gap, Need::kOptional);
  s.integer("workers", v.workers, Need::kOptional);
  s.finish();
}

void validate_semantics(const ExperimentConfig& cfg, std::vector<std::string>& errors) {
  collect(errors, "epidemic", [&] { cfg.epidemic.validate(); });
  collect(errors, "deployment", [&] { cfg.deployment.validate(); });
  collect(errors, "uncertainty", [&] { cfg.uncertainty.validate(); });
  if (cfg.cost_model == CostModel::kQueueing) {
    collect(errors, "cost.queueing", [&] { cfg.queueing.validate(); });
  } else {
    collect(errors, "cost.threshold", [&] { threshold_cost_fn(cfg.threshold); });
  }
  if (cfg.uncertainty.change_last > cfg.epidemic.horizon) {
    errors.push_back("uncertainty.change_days: last change day exceeds epidemic.horizon");
  }
  const SolverSettings& s = cfg.solver;
  if (s.grid_start < 1) errors.push_back("solver.grid_start: must be >= 1");
  if (s.grid_max < s.grid_start) errors.push_back("solver.grid_max: must be >= grid_start");
  if (!(s.tolerance > 0)) errors.push_back("solver.tolerance: must be > 0");
  if (s.max_iterations < 1) errors.push_back("solver.max_iterations: must be >= 1");
  if (s.hot_start_iterations < 1) errors.push_back("solver.hot_start_iterations: must be >= 1");
  if (!(s.hot_start_gap > 0)) errors.push_back("solver.hot_start_gap: must be > 0");
  if (s.workers < 1) errors.push_back("solver.workers: must be >= 1");
  if (cfg.output.directory.empty()) errors.push_back("output.directory: must not be empty");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source + ": top level must be an object");

  Diagnostics diag;
  ExperimentConfig cfg;
  Section root(&doc, "", diag);
  root.integer("schema_version", cfg.schema_version, Need::kRequired);
  root.string("name", cfg.name, Need::kOptional);
  read_epidemic(root.child("epidemic", Need::kRequired), cfg.epidemic);
  read_cost(root.child("cost", Need::kRequired), cfg);
  read_deployment(root.child("deployment", Need::kRequired), cfg.deployment);
  read_uncertainty(root.child("uncertainty", Need::kRequired), cfg.uncertainty);
  read_solver(root.child("solver", Need::kOptional), cfg.solver);
  Section out = root.child("output", Need::kOptional);
  out.string("directory", cfg.output.directory, Need::kOptional);
  out.finish();
  root.finish();

  if (cfg.schema_version != kSchemaVersion && doc.contains("schema_version")) {
    diag.errors.push_back("schema_version: unsupported version " +
                          std::to_string(cfg.schema_version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
  }
  // The doubling schedule starts at the set's own N unless told otherwise.
  auto defaulted = [&](const std::string& key) {
    return std::find(diag.defaults.begin(), diag.defaults.end(), key) != diag.defaults.end();
  };
  if (defaulted("solver.grid_start")) cfg.solver.grid_start = cfg.uncertainty.grid;
  if (defaulted("solver.grid_max")) cfg.solver.grid_max = cfg.solver.grid_start;
  if (diag.errors.empty()) validate_semantics(cfg, diag.errors);
  if (!diag.errors.empty()) {
    std::string msg = source + ": invalid configuration";
    for (const auto& e : diag.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  // The section of the cost model not in use is not a default.
  const std::string unused =
      cfg.cost_model == CostModel::kQueueing ? "cost.threshold" : "cost.queueing";
  std::erase_if(diag.defaults, [&](const std::string& d) { return d.rfind(unused, 0) == 0; });
  cfg.defaults_applied = std::move(diag.defaults);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

double ExperimentConfig::baseline_workforce() const { return initial_state(epidemic)[1].active(); }

DayCost ExperimentConfig::make_cost() const {
  if (cost_model == CostModel::kThreshold) return threshold_cost_fn(threshold);
  return queueing_cost_fn(queueing, baseline_workforce());
}

RobustOptions ExperimentConfig::robust_options() const {
  RobustOptions o;
  o.workers = solver.workers;
  o.tolerance = solver.tolerance;
  o.max_iterations = solver.max_iterations;
  o.hot_start_iterations = solver.hot_start_iterations;
  o.hot_start_gap = solver.hot_start_gap;
  return o;
}

std::string describe(const ExperimentConfig& c) {
  std::ostringstream out;
  out.precision(6);
  const UncertaintySet& u = c.uncertainty;
  out << "config " << (c.name.empty() ? "(unnamed)" : c.name) << " (schema " << c.schema_version
      << ")\n";
  out << "  populations N = (" << c.epidemic.population[0] << ", " << c.epidemic.population[1]
      << "), contact rates = (" << c.epidemic.base_contact_rate[0] << ", "
      << c.epidemic.base_contact_rate[1] << ")\n";
  out << "  R0 range [" << std::fixed << std::setprecision(3)
      << basic_reproduction_number(c.epidemic, u.p_initial_lo) << ", "
      << basic_reproduction_number(c.epidemic, u.p_initial_hi) << "] before the change, ["
      << basic_reproduction_number(c.epidemic, u.p_after_lo) << ", "
      << basic_reproduction_number(c.epidemic, u.p_after_hi) << "] after\n";
  out.unsetf(std::ios::fixed);
  out << std::setprecision(6);
  out << "  p1 in [" << u.p_initial_lo << ", " << u.p_initial_hi << "], p2 in [" << u.p_after_lo
      << ", " << u.p_after_hi << "], change day in [" << u.change_first << ", " << u.change_last
      << "], N = " << c.solver.grid_start;
  if (c.solver.grid_max != c.solver.grid_start) out << ".." << c.solver.grid_max;
  out << "\n";
  out << "  cost model " << (c.cost_model == CostModel::kQueueing ? "queueing" : "threshold")
      << ", budget " << c.deployment.total_budget << ", tau " << c.deployment.service_days
      << ", lag " << c.deployment.lag << ", planner horizon " << c.deployment.planner_horizon
      << "\n";
  for (const auto& d : c.defaults_applied) out << "  default: " << d << "\n";
  return out.str();
}

}  // namespace surge::lab
