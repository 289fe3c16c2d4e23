// SPDX-License-Identifier: Apache-2.0
#include "aircomp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

#include "aircomp/normalizing.hpp"

namespace aircomp {

namespace {

Eigen::Vector2d cluster_centroid(const Cluster& c) {
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (const auto& d : c.devices) acc += d.position;
  return acc / double(c.devices.size());
}

/// Clusters of UAV m in the angular order their blocks are visited.
std::vector<std::vector<int>> uav_cluster_groups(const Scenario& s) {
  const int M = s.num_uavs;
  std::vector<std::vector<int>> groups(M);
  for (int l = 0; l < s.num_clusters(); ++l) groups[l % M].push_back(l);
  for (int m = 0; m < M; ++m) {
    auto& g = groups[m];
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    for (int l : g) center += cluster_centroid(s.clusters[l]);
    center /= double(g.size());
    std::sort(g.begin(), g.end(), [&](int a, int b) {
      const Eigen::Vector2d da = cluster_centroid(s.clusters[a]) - center;
      const Eigen::Vector2d db = cluster_centroid(s.clusters[b]) - center;
      const double aa = std::atan2(da.y(), da.x()), ab = std::atan2(db.y(), db.x());
      if (aa != ab) return aa < ab;
      return a < b;
    });
  }
  return groups;
}

/// Contiguous slot blocks per cluster on its UAV's timeline; each cluster
/// activates up to D slots centered in its block.
Assignment initial_assignment(const Scenario& s, int d) {
  const int L = s.num_clusters(), M = s.num_uavs, N = s.num_slots();
  Assignment a(L, M, N);
  const auto groups = uav_cluster_groups(s);
  for (int m = 0; m < M; ++m) {
    const auto& g = groups[m];
    const int parts = static_cast<int>(g.size());
    int start = 0;
    for (int i = 0; i < parts; ++i) {
      const int len = N / parts + (i < N % parts ? 1 : 0);
      const int active = std::min(d, len);
      const int offset = (len - active) / 2;
      for (int n = start + offset; n < start + offset + active; ++n)
        a.set(g[i], m, n, true);
      start += len;
    }
  }
  return a;
}

TrajectorySet circular_trajectory(const Scenario& s) {
  const int M = s.num_uavs, N = s.num_slots();
  TrajectorySet q(M, N);
  const auto groups = uav_cluster_groups(s);
  const double max_radius = s.phys.vmax * s.phys.duration / (2.0 * M_PI);
  for (int m = 0; m < M; ++m) {
    const auto& g = groups[m];
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    for (int l : g) center += cluster_centroid(s.clusters[l]);
    center /= double(g.size());
    double reach = 0.0;
    for (int l : g)
      reach = std::max(reach, (cluster_centroid(s.clusters[l]) - center).norm());
    const double radius = std::min(reach, max_radius);
    const Eigen::Vector2d first = cluster_centroid(s.clusters[g.front()]) - center;
    const double phase = (first.norm() > 1e-9) ? std::atan2(first.y(), first.x()) : 0.0;
    for (int n = 0; n < N; ++n) {
      const double ang = phase + 2.0 * M_PI * double(n + 1) / double(N);
      q.waypoints[m].col(n) =
          center + radius * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    }
  }
  return q;
}

PowerPlan initial_power(const Scenario& s, const Assignment& a, int d) {
  PowerPlan p(s.num_devices(), s.num_slots());
  for (int l = 0; l < a.L; ++l) {
    const int k0 = s.device_offset(l);
    const int kl = static_cast<int>(s.clusters[l].devices.size());
    for (int n = 0; n < a.N; ++n) {
      if (a.uav_of(l, n) < 0) continue;
      for (int k = k0; k < k0 + kl; ++k)
        p.at(k, n) = s.device(k).power_budget / double(d);
    }
  }
  return p;
}

PowerPlan equal_power_plan(const Scenario& s, const Assignment& a, int d) {
  return initial_power(s, a, d);  // the equal-power scheme uses the same split
}

double state_gamma(const Scenario& s, const BcdState& st, const ChannelGains& g) {
  return eta_gamma(s, st.assignment, st.power, st.eta, g);
}

}  // namespace

int upper_bound_tasks(const Scenario& s) {
  return static_cast<int>(std::floor(double(s.num_uavs) * s.phys.duration /
                                     (s.phys.delta * double(s.num_clusters())) +
                                     1e-9));
}

BcdState init_state(const Scenario& s, int d, const SchemeConfig& config) {
  if (d < 1) throw std::invalid_argument("task count must be at least 1");
  BcdState st;
  st.assignment = initial_assignment(s, d);
  if (config.pinned_trajectory) {
    st.trajectory = *config.pinned_trajectory;
  } else {
    st.trajectory = circular_trajectory(s);
    if (!repair_min_separation(st.trajectory, s.phys.dmin)) {
      // Fall back to hover points at the group centroids, pushed apart once.
      TrajectorySet hover(s.num_uavs, s.num_slots());
      const auto groups = uav_cluster_groups(s);
      for (int m = 0; m < s.num_uavs; ++m) {
        Eigen::Vector2d center = Eigen::Vector2d::Zero();
        for (int l : groups[m]) center += cluster_centroid(s.clusters[l]);
        center /= double(groups[m].size());
        for (int n = 0; n < s.num_slots(); ++n) hover.waypoints[m].col(n) = center;
      }
      if (!repair_min_separation(hover, s.phys.dmin))
        throw std::runtime_error("cannot construct a separation-feasible initial trajectory");
      st.trajectory = std::move(hover);
    }
  }
  st.power = initial_power(s, st.assignment, d);
  const ChannelGains g = gains(s, st.trajectory);
  st.eta = optimal_eta(s, st.assignment, st.power, g);
  return st;
}

BcdResult bcd_solve(const Scenario& s, int d, const SolverOptions& opts,
                    const SchemeConfig& config, const BcdState* warm_init,
                    SolveCounters* counters) {
  BcdResult res;
  res.state = warm_init ? *warm_init : init_state(s, d, config);
  BcdState& st = res.state;
  ChannelGains g = gains(s, st.trajectory);

  double gamma = state_gamma(s, st, g);
  st.gamma_history.clear();
  st.gamma_history.push_back(gamma);
  res.counts_met = true;

  SchedulingOptions sched_opts = opts.scheduling;
  sched_opts.orthogonal = config.orthogonal;

  for (int it = 0; it < opts.bcd_max_iters; ++it) {
    // Cluster scheduling and association (dual method).
    const CostTensor costs = hypothetical_ratios(s, g, st.power, st.eta);
    const SchedulingResult sched = solve_scheduling(costs, d, sched_opts);
    if (counters) ++counters->scheduling_solves;
    if (!sched.counts_met) {
      res.counts_met = false;
      res.error = "scheduling cannot reach the requested task count";
      res.gamma = std::numeric_limits<double>::infinity();
      return res;
    }
    if (sched.gamma <= gamma + 1e-12) {
      st.assignment = sched.assignment;
      gamma = std::min(gamma, sched.gamma);
    }
    // Keep powers consistent with the (possibly re-decided) schedule: devices
    // of unscheduled clusters must stay silent.
    for (int l = 0; l < st.assignment.L; ++l) {
      const int k0 = s.device_offset(l);
      const int kl = static_cast<int>(s.clusters[l].devices.size());
      for (int n = 0; n < st.assignment.N; ++n)
        if (st.assignment.uav_of(l, n) < 0)
          for (int k = k0; k < k0 + kl; ++k) st.power.at(k, n) = 0.0;
    }

    // Transmit powers.
    if (config.optimize_power) {
      const PowerResult pr =
          solve_power(s, st.assignment, st.eta, g, opts.power, &st.power);
      if (counters) ++counters->power_solves;
      if (pr.status != SolveStatus::infeasible) {
        const double before = eta_gamma(s, st.assignment, st.power, st.eta, g);
        const double after = eta_gamma(s, st.assignment, pr.power, st.eta, g);
        if (after <= before + 1e-12) st.power = pr.power;
      }
    } else {
      st.power = equal_power_plan(s, st.assignment, d);
    }

    // Normalizing factors (closed form, exact block optimum).
    st.eta = optimal_eta(s, st.assignment, st.power, g);

    // Trajectories (SCA), unless pinned.
    if (config.optimize_trajectory && !config.pinned_trajectory) {
      const ScaResult sca = sca_iterate(s, st.assignment, st.power, st.eta,
                                        st.trajectory, opts.sca);
      if (counters) ++counters->trajectory_solves;
      st.trajectory = sca.q;
      g = gains(s, st.trajectory);
    }

    const double gamma_new = state_gamma(s, st, g);
    st.gamma_history.push_back(gamma_new);
    const double drop = gamma - gamma_new;
    gamma = std::min(gamma, gamma_new);
    res.iterations = it + 1;
    if (drop <= opts.bcd_tol * std::max(gamma, 1e-12)) break;
  }
  res.gamma = gamma;
  return res;
}

int bisect_max_feasible(int d_ub, const std::function<bool(int)>& probe) {
  if (d_ub < 1) return 0;
  int d_lo = 0, d_hi = d_ub;
  bool hi_was_rejected = false;
  while (d_hi - d_lo > 1) {
    const int d = (d_lo + d_hi + 1) / 2;  // ceil midpoint
    if (probe(d)) {
      d_lo = d;
    } else {
      d_hi = d;
      hi_was_rejected = true;
    }
  }
  // The loop cannot probe the initial upper bound itself (the gap never
  // exceeds one there); test it directly when it was never rejected.
  if (d_lo < d_hi && !hi_was_rejected && probe(d_hi)) d_lo = d_hi;
  return d_lo;
}

SolveOutcome bisection_solve(const Scenario& s, const SolverOptions& opts,
                             const SchemeConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  SolveOutcome out;
  out.upper_bound_tasks = upper_bound_tasks(s);

  bool have_state = false;

  auto probe = [&](int d) {
    const BcdState* warm = nullptr;
    BcdState carried;
    if (opts.carry_trajectory && have_state) {
      carried = init_state(s, d, config);
      carried.trajectory = out.state.trajectory;  // carry Q, reset P and eta
      carried.power = initial_power(s, carried.assignment, d);
      const ChannelGains g = gains(s, carried.trajectory);
      carried.eta = optimal_eta(s, carried.assignment, carried.power, g);
      warm = &carried;
    }
    const BcdResult r = bcd_solve(s, d, opts, config, warm, &out.counters);
    ProbeTrace trace;
    trace.d = d;
    trace.gamma = r.gamma;
    trace.gamma_history = r.state.gamma_history;
    trace.accepted = r.counts_met && r.gamma <= 1.0 + opts.accept_tol;
    if (trace.accepted) {
      out.d_star = d;
      out.state = r.state;
      have_state = true;
    } else if (!r.error.empty() && out.error.empty()) {
      out.error = r.error;
    }
    out.probes.push_back(trace);
    return trace.accepted;
  };

  bisect_max_feasible(out.upper_bound_tasks, probe);
  if (out.d_star == 0 && out.error.empty())
    out.error = "no task count is feasible: even D = 1 misses the MSE targets";

  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

std::vector<std::pair<int, double>> gamma_profile(const Scenario& s,
                                                  const std::vector<int>& d_list,
                                                  const SolverOptions& opts,
                                                  const SchemeConfig& config) {
  std::vector<std::pair<int, double>> out;
  out.reserve(d_list.size());
  for (int d : d_list) out.emplace_back(d, bcd_solve(s, d, opts, config).gamma);
  return out;
}

}  // namespace aircomp
