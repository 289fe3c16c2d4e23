// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: solve single instances, sweep budgets or mission
// durations over schemes and seeds, re-emit plot CSVs from saved records, and
// verify saved outcomes against the independent constraint checker.
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "aircomp/records.hpp"
#include "aircomp/verifier.hpp"

namespace fs = std::filesystem;
using namespace aircomp;

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::string generate = "paper";
  double duration = 80.0;
  int num_uavs = 1;
  double power = 0.8;
  std::vector<std::string> schemes{"joint"};
  std::vector<std::uint64_t> seeds{1};
  std::string sweep_axis = "none";
  std::vector<double> values;
  std::string out_dir = "out";
  double tol = 1e-3;
  int max_iters = 50;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_sweep) {
  cmd->add_option("--scenario", args.scenario_path, "scenario JSON file");
  cmd->add_option("--generate", args.generate, "generator when no file: paper|desk");
  cmd->add_option("--T", args.duration, "mission duration (s)");
  cmd->add_option("--M", args.num_uavs, "UAV count");
  cmd->add_option("--P", args.power, "per-device power budget (W)");
  cmd->add_option("--scheme", args.schemes, "schemes to run")->delimiter(',');
  cmd->add_option("--seeds", args.seeds, "placement seeds")->delimiter(',');
  if (with_sweep) {
    cmd->add_option("--sweep-axis", args.sweep_axis, "power|duration|none");
    cmd->add_option("--values", args.values, "sweep values")->delimiter(',');
  }
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--tol", args.tol, "BCD fractional decrease tolerance");
  cmd->add_option("--max-iters", args.max_iters, "BCD iteration cap");
  cmd->add_option("--threads", args.threads, "independent-run parallelism");
}

ExperimentSpec to_spec(const CommonArgs& args) {
  ExperimentSpec spec;
  spec.scenario_path = args.scenario_path;
  spec.generator = args.generate;
  spec.duration_s = args.duration;
  spec.num_uavs = args.num_uavs;
  spec.power_budget_w = args.power;
  spec.schemes.clear();
  for (const auto& s : args.schemes) spec.schemes.push_back(scheme_from_name(s));
  spec.sweep_axis = args.sweep_axis;
  spec.sweep_values = args.values;
  spec.seeds = args.seeds;
  spec.out_dir = args.out_dir;
  spec.solver.bcd_tol = args.tol;
  spec.solver.bcd_max_iters = args.max_iters;
  spec.threads = args.threads;
  if (spec.schemes.empty()) throw CLI::ValidationError("--scheme", "no schemes given");
  if (spec.seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  if (spec.sweep_axis != "none" && spec.sweep_values.empty())
    throw CLI::ValidationError("--values", "sweep axis set but no values");
  for (double v : spec.sweep_values)
    if (v <= 0.0) throw CLI::ValidationError("--values", "sweep values must be positive");
  return spec;
}

int finish_run(const RunSummary& summary) {
  for (const auto& p : summary.record_paths) std::cout << "wrote " << p << "\n";
  std::cout << "wrote " << summary.aggregate_csv << "\n";
  if (summary.failures > 0) {
    std::cerr << summary.failures << " run(s) failed; see record error fields\n";
    return 2;
  }
  return 0;
}

int emit_plots(const std::vector<std::string>& inputs, const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& in : inputs) {
    const ResultRecord rec = load_record(in);
    const std::string stem = fs::path(in).stem().string();
    emit_trajectory_csv(rec, (fs::path(out_dir) / (stem + "_trajectory.csv")).string());
    emit_timeline_csv(rec, (fs::path(out_dir) / (stem + "_timeline.csv")).string());
    std::cout << "emitted plots for " << in << "\n";
  }
  return 0;
}

int verify_record(const std::string& path) {
  const ResultRecord rec = load_record(path);
  if (!rec.error.empty()) {
    std::cerr << "record carries an error: " << rec.error << "\n";
    return 1;
  }
  if (!rec.state) {
    std::cout << "record has no state (D* = " << rec.d_star << "); nothing to verify\n";
    return 0;
  }
  VerifyOptions vo;
  vo.required_task_count = rec.d_star;
  const auto problems = verify_state(rec.scenario, rec.state->assignment,
                                     rec.state->power, rec.state->eta,
                                     rec.state->trajectory, vo);
  if (problems.empty()) {
    std::cout << "record verifies: D* = " << rec.d_star << ", all constraints hold\n";
    return 0;
  }
  for (const auto& p : problems) std::cerr << "violation: " << p << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-min AirComp task planning for multi-UAV clusters"};
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, compare_args;
  auto* solve_cmd = app.add_subcommand("solve", "run one scheme on one scenario");
  add_common(solve_cmd, solve_args, false);
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep power or duration over schemes");
  add_common(sweep_cmd, sweep_args, true);
  auto* compare_cmd = app.add_subcommand("compare", "run several schemes, no sweep");
  add_common(compare_cmd, compare_args, false);

  std::vector<std::string> plot_inputs;
  std::string plot_out = "plots";
  auto* plots_cmd = app.add_subcommand("emit-plots", "CSV exports from saved records");
  plots_cmd->add_option("--records", plot_inputs, "record JSON files")
      ->required()
      ->delimiter(',');
  plots_cmd->add_option("--out", plot_out, "output directory");

  std::string verify_path;
  auto* verify_cmd = app.add_subcommand("verify", "check a saved record");
  verify_cmd->add_option("--record", verify_path, "record JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return finish_run(run_experiment(to_spec(solve_args)));
    if (sweep_cmd->parsed()) return finish_run(run_experiment(to_spec(sweep_args)));
    if (compare_cmd->parsed()) return finish_run(run_experiment(to_spec(compare_args)));
    if (plots_cmd->parsed()) return emit_plots(plot_inputs, plot_out);
    if (verify_cmd->parsed()) return verify_record(verify_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
