// SPDX-License-Identifier: Apache-2.0
#include "aircomp/benchmarks.hpp"

#include <stdexcept>

namespace aircomp {

std::string scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::joint: return "joint";
    case SchemeId::static_uav: return "static_uav";
    case SchemeId::equal_power: return "equal_power";
    case SchemeId::orthogonal: return "orthogonal";
    case SchemeId::upper_bound: return "upper_bound";
  }
  return "joint";
}

SchemeId scheme_from_name(const std::string& name) {
  if (name == "joint") return SchemeId::joint;
  if (name == "static_uav") return SchemeId::static_uav;
  if (name == "equal_power") return SchemeId::equal_power;
  if (name == "orthogonal") return SchemeId::orthogonal;
  if (name == "upper_bound") return SchemeId::upper_bound;
  throw std::invalid_argument("unknown scheme: " + name);
}

namespace {

Eigen::Vector2d devices_centroid(const Scenario& s, const std::vector<int>& clusters) {
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  int count = 0;
  for (int l : clusters)
    for (const auto& d : s.clusters[l].devices) {
      acc += d.position;
      ++count;
    }
  return acc / double(count);
}

}  // namespace

TrajectorySet static_positions(const Scenario& s) {
  const int M = s.num_uavs, N = s.num_slots();
  std::vector<std::vector<int>> groups(M);
  if (M == 2 && s.num_clusters() == 6) {
    groups[0] = {0, 1, 5};  // reference grouping: clusters 1, 2, 6
    groups[1] = {2, 3, 4};  //                      clusters 3, 4, 5
  } else {
    for (int l = 0; l < s.num_clusters(); ++l) groups[l % M].push_back(l);
  }
  TrajectorySet q(M, N);
  for (int m = 0; m < M; ++m) {
    const Eigen::Vector2d c = devices_centroid(s, groups[m]);
    for (int n = 0; n < N; ++n) q.waypoints[m].col(n) = c;
  }
  return q;
}

int upper_bound(const Scenario& s) { return upper_bound_tasks(s); }

SchemeConfig scheme_config(SchemeId id, const Scenario& s) {
  SchemeConfig config;
  switch (id) {
    case SchemeId::joint:
    case SchemeId::upper_bound:
      break;
    case SchemeId::static_uav: {
      config.optimize_trajectory = false;
      TrajectorySet pinned = static_positions(s);
      if (s.num_uavs > 1) {
        for (int m = 0; m < s.num_uavs; ++m)
          for (int i = m + 1; i < s.num_uavs; ++i)
            if ((pinned.waypoints[m].col(0) - pinned.waypoints[i].col(0)).norm() <
                s.phys.dmin)
              throw std::invalid_argument(
                  "static UAV centroids violate the minimum separation");
      }
      config.pinned_trajectory = std::move(pinned);
      break;
    }
    case SchemeId::equal_power:
      config.optimize_power = false;
      break;
    case SchemeId::orthogonal:
      config.orthogonal = true;
      break;
  }
  return config;
}

SolveOutcome run_scheme(SchemeId id, const Scenario& s, const SolverOptions& opts) {
  if (id == SchemeId::upper_bound) {
    SolveOutcome out;
    out.d_star = upper_bound(s);
    out.upper_bound_tasks = out.d_star;
    return out;
  }
  return bisection_solve(s, opts, scheme_config(id, s));
}

}  // namespace aircomp
