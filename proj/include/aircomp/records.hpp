// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner and result persistence: one JSON record per
// (scheme, sweep value, seed) cell, plot-ready CSV exports, and an aggregate
// table of mean task counts.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aircomp/benchmarks.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/solver.hpp"

namespace aircomp {

struct ExperimentSpec {
  std::string scenario_path;  ///< file source; empty when generated
  std::string generator = "paper";  ///< "paper" | "desk"
  double duration_s = 80.0;
  int num_uavs = 1;
  double power_budget_w = 0.8;
  std::vector<SchemeId> schemes{SchemeId::joint};
  std::string sweep_axis = "none";  ///< "power" | "duration" | "none"
  std::vector<double> sweep_values; ///< empty with axis "none"
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = ".";
  SolverOptions solver;
  int threads = 1;
};

struct ResultRecord {
  int schema_version = 1;
  std::string scheme;
  std::string sweep_axis = "none";
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  Scenario scenario;
  int d_star = 0;
  int upper_bound_tasks = 0;
  std::vector<ProbeTrace> probes;
  SolveCounters counters;
  double runtime_seconds = 0.0;
  std::optional<BcdState> state;  ///< absent when d_star = 0
  std::string error;
};

std::string record_to_json(const ResultRecord& r);
ResultRecord record_from_json(const std::string& text);
ResultRecord load_record(const std::string& path);
void save_record(const ResultRecord& r, const std::string& path);

/// Waypoint export: columns (uav, n, t_seconds, x, y) with N+1 rows per UAV,
/// row 0 repeating the closing position q[0] = q[N].
void emit_trajectory_csv(const ResultRecord& r, const std::string& path);

/// Active-association export: columns (n, t_seconds, uav, cluster), one row
/// per active (l, m) pair, ordered by slot then UAV.
void emit_timeline_csv(const ResultRecord& r, const std::string& path);

struct RunSummary {
  std::vector<std::string> record_paths;
  std::string aggregate_csv;
  int failures = 0;
};

/// Executes every (scheme, sweep value, seed) cell, verifies each outcome with
/// the independent checker before writing, and emits the aggregate CSV of
/// mean D* per (scheme, value). Failures are isolated per record.
RunSummary run_experiment(const ExperimentSpec& spec);

/// Scenario for one sweep cell (generated or loaded).
Scenario cell_scenario(const ExperimentSpec& spec, double sweep_value,
                       std::uint64_t seed);

}  // namespace aircomp
