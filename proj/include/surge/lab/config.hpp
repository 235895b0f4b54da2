#pragma once

// Experiment configuration: one JSON document (comments allowed) holding the
// epidemic, cost, deployment, uncertainty, solver and output sections.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "surge/cost.hpp"
#include "surge/epidemic.hpp"
#include "surge/robust.hpp"
#include "surge/staffing.hpp"

namespace surge::lab {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CostModel { kQueueing, kThreshold };

struct SolverSettings {
  int grid_start = 20;  // N0 of the doubling schedule; defaults to the set's N
  int grid_max = 20;
  double tolerance = 1e-4;
  int max_iterations = 40;
  bool hot_start = true;
  int hot_start_iterations = 10;  // K
  double hot_start_gap = 0.05;    // epsilon
  int workers = 8;
};

struct OutputSettings {
  std::string directory = "out";
};

struct ExperimentConfig {
  std::string name;
  int schema_version = kSchemaVersion;
  SeirParams epidemic;
  CostModel cost_model = CostModel::kQueueing;
  QueueingCostSpec queueing;
  PiecewiseLinearConvex threshold;
  DeploymentConstraints deployment;
  UncertaintySet uncertainty;
  SolverSettings solver;
  OutputSettings output;
  // Dotted paths of optional fields that took their default value.
  std::vector<std::string> defaults_applied;

  /// Regular staff on day 1, omega_0.
  double baseline_workforce() const;
  DayCost make_cost() const;
  RobustOptions robust_options() const;
};

/// Parses and validates; every problem found is listed in one ConfigError.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Human-readable echo, including the R0 range implied by the set.
std::string describe(const ExperimentConfig& config);

}  // namespace surge::lab
