#pragma once

// CSV and JSON emission. Numbers are written in shortest round-trip form so
// that reruns with the same config produce byte-identical files; wall-clock
// timings go to their own file.

#include <filesystem>
#include <string>
#include <vector>

#include "surge/lab/config.hpp"
#include "surge/lab/experiments.hpp"

namespace surge::lab {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to exactly x.
std::string format_number(double x);

/// Rows (relative_day, callup); relative day 1 is the declaration day.
void write_policy_csv(const std::filesystem::path& path, const DeploymentVector& h,
                      const DeploymentConstraints& c);
DeploymentVector read_policy_csv(const std::filesystem::path& path, const DeploymentConstraints& c);

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<IterationRecord>& log);
void write_timings_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& log);
void write_scenarios_csv(const std::filesystem::path& path, const std::vector<ScenarioRow>& rows);
void write_out_of_sample_csv(const std::filesystem::path& path,
                             const std::vector<OutOfSampleRow>& rows);
void write_cost_benefit_csv(const std::filesystem::path& path,
                            const std::vector<CostBenefitRow>& rows);
void write_p_scan_csv(const std::filesystem::path& path, const std::vector<PScanRow>& rows);

/// Per-scenario, per-policy daily series (load, workforce, day cost).
void write_plot_json(const std::filesystem::path& path, const SolveResult& result,
                     const ExperimentConfig& config);

/// Everything a solve produces, under `dir`:
///   policy.csv, policy_integral.csv, policy_naive.csv, convergence.csv, scenarios.csv,
///   plot.json, summary.json  (deterministic)
///   timings.csv              (wall clock)
void emit_reports(const SolveResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

/// Names of the byte-stable files emit_reports writes.
const std::vector<std::string>& deterministic_report_files();

}  // namespace surge::lab
