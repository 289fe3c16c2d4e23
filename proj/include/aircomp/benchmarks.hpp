// SPDX-License-Identifier: Apache-2.0
//
// Comparison schemes: the joint design with individual blocks pinned or
// disabled, plus the interference-free task-count ceiling.
#pragma once

#include <string>

#include "aircomp/scenario.hpp"
#include "aircomp/solver.hpp"

namespace aircomp {

enum class SchemeId { joint, static_uav, equal_power, orthogonal, upper_bound };

std::string scheme_name(SchemeId id);
SchemeId scheme_from_name(const std::string& name);

/// Fixed hover points of the static scheme: the device centroid for one UAV;
/// for two UAVs on the six-cluster reference layout, the centroids of the
/// devices of clusters {1, 2, 6} and {3, 4, 5}; otherwise centroids of the
/// index-partitioned groups.
TrajectorySet static_positions(const Scenario& s);

/// floor(M*T/(delta*L)): every cluster served a full share of slots.
int upper_bound(const Scenario& s);

SchemeConfig scheme_config(SchemeId id, const Scenario& s);

/// Runs the scheme's bisection. For upper_bound no optimization runs; the
/// outcome just carries the closed-form count.
SolveOutcome run_scheme(SchemeId id, const Scenario& s,
                        const SolverOptions& opts = {});

}  // namespace aircomp
