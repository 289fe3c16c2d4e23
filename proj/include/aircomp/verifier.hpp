// SPDX-License-Identifier: Apache-2.0
//
// Independent feasibility verifier. Recomputes every original constraint of
// the planning problem directly from the scenario and raw state, on purpose
// sharing no computation code with the solver modules.
#pragma once

#include <string>
#include <vector>

#include "aircomp/scenario.hpp"
#include "aircomp/state.hpp"

namespace aircomp {

struct VerifyOptions {
  double mse_rel_tol = 1e-6;    ///< MSE_{l,n} <= eps_l * (1 + tol)
  double budget_rel_tol = 1e-9;
  double speed_tol_m = 1e-6;    ///< absolute slack on per-slot displacement
  double collision_tol_m = 1e-6;
  int required_task_count = -1;  ///< per-cluster count to enforce; -1 skips
};

/// Empty result means the state satisfies binary structure, task counts, MSE
/// targets on active slots, zero power off schedule, budgets, speed, cyclic
/// return, and inter-UAV separation.
std::vector<std::string> verify_state(const Scenario& s, const Assignment& a,
                                      const PowerPlan& power,
                                      const Normalizers& eta,
                                      const TrajectorySet& q,
                                      const VerifyOptions& opts = {});

}  // namespace aircomp
