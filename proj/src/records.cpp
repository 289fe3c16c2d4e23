// SPDX-License-Identifier: Apache-2.0
#include "aircomp/records.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "aircomp/verifier.hpp"
#include "json.hpp"

namespace aircomp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json probes_to_json(const std::vector<ProbeTrace>& probes) {
  json arr = json::array();
  for (const auto& p : probes)
    arr.push_back({{"d", p.d},
                   {"gamma", p.gamma},
                   {"accepted", p.accepted},
                   {"gamma_history", p.gamma_history}});
  return arr;
}

json state_to_json(const BcdState& st) {
  json out;
  json schedule = json::array();
  for (int n = 0; n < st.assignment.N; ++n)
    for (int m = 0; m < st.assignment.M; ++m) {
      const int l = st.assignment.cluster_of(m, n);
      if (l >= 0) schedule.push_back({{"n", n}, {"uav", m}, {"cluster", l}});
    }
  out["schedule"] = std::move(schedule);
  json trajectories = json::array();
  for (int m = 0; m < st.trajectory.M; ++m) {
    json wp = json::array();
    for (int n = 0; n < st.trajectory.N; ++n)
      wp.push_back({st.trajectory.waypoints[m](0, n), st.trajectory.waypoints[m](1, n)});
    trajectories.push_back(std::move(wp));
  }
  out["trajectories"] = std::move(trajectories);
  json power = json::array();
  for (int k = 0; k < st.power.K; ++k) {
    json row = json::array();
    for (int n = 0; n < st.power.N; ++n) row.push_back(st.power.at(k, n));
    power.push_back(std::move(row));
  }
  out["power"] = std::move(power);
  json eta = json::array();
  for (int l = 0; l < st.eta.L; ++l)
    for (int m = 0; m < st.eta.M; ++m)
      for (int n = 0; n < st.eta.N; ++n)
        if (st.eta.at(l, m, n) != 0.0)
          eta.push_back({{"l", l}, {"m", m}, {"n", n}, {"value", st.eta.at(l, m, n)}});
  out["eta"] = std::move(eta);
  out["gamma_history"] = st.gamma_history;
  return out;
}

BcdState state_from_json(const json& j, const Scenario& s) {
  BcdState st;
  const int L = s.num_clusters(), M = s.num_uavs, N = s.num_slots();
  st.assignment = Assignment(L, M, N);
  for (const auto& e : j.at("schedule"))
    st.assignment.set(e.at("cluster").get<int>(), e.at("uav").get<int>(),
                      e.at("n").get<int>(), true);
  st.trajectory = TrajectorySet(M, N);
  const auto& trajectories = j.at("trajectories");
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n)
      st.trajectory.waypoints[m].col(n) =
          Eigen::Vector2d(trajectories[m][n][0].get<double>(),
                          trajectories[m][n][1].get<double>());
  st.power = PowerPlan(s.num_devices(), N);
  const auto& power = j.at("power");
  for (int k = 0; k < st.power.K; ++k)
    for (int n = 0; n < N; ++n) st.power.at(k, n) = power[k][n].get<double>();
  st.eta = Normalizers(L, M, N);
  for (const auto& e : j.at("eta"))
    st.eta.at(e.at("l").get<int>(), e.at("m").get<int>(), e.at("n").get<int>()) =
        e.at("value").get<double>();
  if (j.contains("gamma_history"))
    st.gamma_history = j.at("gamma_history").get<std::vector<double>>();
  return st;
}

}  // namespace

std::string record_to_json(const ResultRecord& r) {
  json doc;
  doc["schema_version"] = r.schema_version;
  doc["scheme"] = r.scheme;
  doc["sweep_axis"] = r.sweep_axis;
  doc["sweep_value"] = r.sweep_value;
  doc["seed"] = r.seed;
  doc["scenario"] = json::parse(scenario_to_json(r.scenario));
  doc["d_star"] = r.d_star;
  doc["upper_bound"] = r.upper_bound_tasks;
  doc["probes"] = probes_to_json(r.probes);
  doc["counters"] = {{"scheduling_solves", r.counters.scheduling_solves},
                     {"power_solves", r.counters.power_solves},
                     {"trajectory_solves", r.counters.trajectory_solves}};
  doc["runtime_seconds"] = r.runtime_seconds;
  if (r.state) doc["state"] = state_to_json(*r.state);
  doc["error"] = r.error;
  return doc.dump(2);
}

ResultRecord record_from_json(const std::string& text) {
  const json doc = json::parse(text);
  ResultRecord r;
  r.schema_version = doc.at("schema_version").get<int>();
  r.scheme = doc.at("scheme").get<std::string>();
  r.sweep_axis = doc.at("sweep_axis").get<std::string>();
  r.sweep_value = doc.at("sweep_value").get<double>();
  r.seed = doc.at("seed").get<std::uint64_t>();
  r.scenario = scenario_from_json(doc.at("scenario").dump());
  r.d_star = doc.at("d_star").get<int>();
  r.upper_bound_tasks = doc.at("upper_bound").get<int>();
  for (const auto& p : doc.at("probes")) {
    ProbeTrace t;
    t.d = p.at("d").get<int>();
    t.gamma = p.at("gamma").get<double>();
    t.accepted = p.at("accepted").get<bool>();
    t.gamma_history = p.at("gamma_history").get<std::vector<double>>();
    r.probes.push_back(std::move(t));
  }
  const auto& c = doc.at("counters");
  r.counters.scheduling_solves = c.at("scheduling_solves").get<int>();
  r.counters.power_solves = c.at("power_solves").get<int>();
  r.counters.trajectory_solves = c.at("trajectory_solves").get<int>();
  r.runtime_seconds = doc.at("runtime_seconds").get<double>();
  if (doc.contains("state")) r.state = state_from_json(doc.at("state"), r.scenario);
  r.error = doc.at("error").get<std::string>();
  return r;
}

ResultRecord load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open record file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return record_from_json(buf.str());
}

void save_record(const ResultRecord& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write record file: " + path);
  out << record_to_json(r) << '\n';
}

void emit_trajectory_csv(const ResultRecord& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  out << "uav,n,t_seconds,x,y\n";
  if (!r.state) return;
  const auto& q = r.state->trajectory;
  const double delta = r.scenario.phys.delta;
  out.precision(17);
  for (int m = 0; m < q.M; ++m)
    for (int n = 0; n <= q.N; ++n) {
      const Eigen::Vector2d pos = q.position(m, n);
      out << m << ',' << n << ',' << double(n) * delta << ',' << pos.x() << ','
          << pos.y() << '\n';
    }
}

void emit_timeline_csv(const ResultRecord& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  out << "n,t_seconds,uav,cluster\n";
  if (!r.state) return;
  const auto& a = r.state->assignment;
  const double delta = r.scenario.phys.delta;
  for (int n = 0; n < a.N; ++n)
    for (int m = 0; m < a.M; ++m) {
      const int l = a.cluster_of(m, n);
      if (l >= 0)
        out << n << ',' << double(n) * delta << ',' << m << ',' << l << '\n';
    }
}

Scenario cell_scenario(const ExperimentSpec& spec, double sweep_value,
                       std::uint64_t seed) {
  if (!spec.scenario_path.empty()) return load_scenario(spec.scenario_path);
  double duration = spec.duration_s;
  double power = spec.power_budget_w;
  if (spec.sweep_axis == "power") power = sweep_value;
  if (spec.sweep_axis == "duration") duration = sweep_value;
  if (spec.generator == "desk")
    return generate_desk_scenario(duration, spec.num_uavs, power, seed);
  return generate_paper_scenario(duration, spec.num_uavs, power, seed);
}

namespace {

std::string value_tag(double v) {
  std::ostringstream os;
  os << v;
  std::string s = os.str();
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

}  // namespace

RunSummary run_experiment(const ExperimentSpec& spec) {
  fs::create_directories(spec.out_dir);
  std::vector<double> values = spec.sweep_values;
  if (spec.sweep_axis == "none" || values.empty()) values = {0.0};

  struct Cell {
    SchemeId scheme;
    double value;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (SchemeId sc : spec.schemes)
    for (double v : values)
      for (std::uint64_t seed : spec.seeds) cells.push_back({sc, v, seed});

  std::vector<ResultRecord> records(cells.size());
  const int ncells = static_cast<int>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, spec.threads))
  for (int i = 0; i < ncells; ++i) {
    const Cell& cell = cells[i];
    ResultRecord& rec = records[i];
    rec.scheme = scheme_name(cell.scheme);
    rec.sweep_axis = spec.sweep_axis;
    rec.sweep_value = spec.sweep_axis == "none" ? 0.0 : cell.value;
    rec.seed = cell.seed;
    try {
      rec.scenario = cell_scenario(spec, cell.value, cell.seed);
      const auto violations = validate(rec.scenario);
      if (!violations.empty()) throw std::runtime_error("invalid scenario: " + violations.front());
      SolveOutcome outcome = run_scheme(cell.scheme, rec.scenario, spec.solver);
      rec.d_star = outcome.d_star;
      rec.upper_bound_tasks = outcome.upper_bound_tasks
                                  ? outcome.upper_bound_tasks
                                  : upper_bound(rec.scenario);
      rec.probes = std::move(outcome.probes);
      rec.counters = outcome.counters;
      rec.runtime_seconds = outcome.runtime_seconds;
      if (cell.scheme != SchemeId::upper_bound) {
        if (outcome.d_star >= 1) {
          VerifyOptions vo;
          vo.required_task_count = outcome.d_star;
          const auto problems =
              verify_state(rec.scenario, outcome.state.assignment, outcome.state.power,
                           outcome.state.eta, outcome.state.trajectory, vo);
          if (!problems.empty())
            rec.error = "verifier: " + problems.front();
          else
            rec.state = std::move(outcome.state);
        } else if (!outcome.error.empty()) {
          rec.error = outcome.error;
        }
      }
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  }

  RunSummary summary;
  for (int i = 0; i < ncells; ++i) {
    const Cell& cell = cells[i];
    std::ostringstream name;
    name << "record_" << scheme_name(cell.scheme);
    if (spec.sweep_axis != "none") name << '_' << spec.sweep_axis << value_tag(cell.value);
    name << "_seed" << cell.seed << ".json";
    const std::string path = (fs::path(spec.out_dir) / name.str()).string();
    save_record(records[i], path);
    summary.record_paths.push_back(path);
    if (!records[i].error.empty()) ++summary.failures;
  }

  // Aggregate mean D* per (scheme, sweep value).
  std::map<std::pair<std::string, double>, std::pair<double, int>> agg;
  for (const auto& r : records)
    if (r.error.empty()) {
      auto& slot = agg[{r.scheme, r.sweep_value}];
      slot.first += r.d_star;
      slot.second += 1;
    }
  const std::string agg_path = (fs::path(spec.out_dir) / "aggregate.csv").string();
  std::ofstream out(agg_path);
  out << "scheme,sweep_value,num_seeds,mean_d_star\n";
  out.precision(17);
  for (const auto& [key, val] : agg)
    out << key.first << ',' << key.second << ',' << val.second << ','
        << val.first / double(val.second) << '\n';
  summary.aggregate_csv = agg_path;
  return summary;
}

}  // namespace aircomp
