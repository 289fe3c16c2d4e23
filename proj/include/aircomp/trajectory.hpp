// SPDX-License-Identifier: Apache-2.0
//
// UAV trajectory optimization for fixed scheduling, powers, and normalizers
// by successive convex approximation. The per-slot MSE is written as
// G + C - F in squared horizontal distances; F and the distance/separation
// terms are replaced by first-order lower bounds at the expansion trajectory,
// giving a convex program whose feasible set is an inner approximation of the
// original one. Distance slacks are eliminated analytically (they bind at
// their linear lower bound), shrinking the program to 2MN + 1 variables; the
// explicit-slack formulation is kept available for equivalence checks.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/convex.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/state.hpp"

namespace aircomp {

/// Linearization data of one active (l, m, n) MSE constraint at Q^r.
struct ScaTripleCache {
  int l = 0, m = 0, n = 0;
  double c_const = 0.0;  ///< K_l + eta^2 sigma^2
  double scale = 1.0;    ///< eps_l K_l^2
  double f_ref = 0.0;    ///< F at the expansion point
  // Quadratic-gain term: all devices transmitting at slot n, seen by UAV m.
  std::vector<Eigen::Vector2d> g_anchor;  ///< q^r_m[n] - w_k
  std::vector<double> g_sr;               ///< ||q^r - w_k||^2
  std::vector<double> g_coef;             ///< eta^2 p_k beta0
  std::vector<int> g_device;
  // Alignment term: own-cluster devices with power, lower-bounded via the
  // first-order expansion in the squared distance.
  std::vector<Eigen::Vector2d> f_w;
  std::vector<double> f_sr;
  std::vector<double> f_slope;  ///< dF/d(s) at s^r, nonpositive
};

struct ScaExpansionPoint {
  TrajectorySet q_ref;
  std::vector<ScaTripleCache> triples;
};

/// Variable layout: q_m[n] packed as (m*N + n)*2 + coord, Gamma last; the
/// explicit-slack variant appends one s variable per transmitting
/// (device, uav, slot).
struct TrajectoryProgram {
  ConvexProgram program;
  int M = 0, N = 0;
  int gamma_var = 0;
  int num_slack = 0;
};

ScaExpansionPoint make_expansion(const Scenario& s, const Assignment& a,
                                 const PowerPlan& power, const Normalizers& eta,
                                 const TrajectorySet& q_ref);

// Built programs hold pointers into the expansion point; it must outlive them.
TrajectoryProgram build_sca_program(const Scenario& s, const ScaExpansionPoint& exp);
TrajectoryProgram build_sca_program_explicit(const Scenario& s,
                                             const ScaExpansionPoint& exp);

struct ScaOptions {
  double rel_tol = 1e-4;  ///< stop when the relative Gamma decrease drops below
  int max_iters = 30;
  SolveOptions convex;
  ScaOptions() { convex.gap_tol = 1e-10; }
};

struct ScaResult {
  TrajectorySet q;
  double gamma = 0.0;               ///< true max MSE ratio at the returned Q
  std::vector<double> gamma_trace;  ///< per-iteration true ratios, non-increasing
  int iterations = 0;
  bool converged = false;
  SolveStatus last_status = SolveStatus::optimal;
};

/// True max MSE ratio of the state at trajectory q (gains recomputed).
double trajectory_gamma(const Scenario& s, const Assignment& a,
                        const PowerPlan& power, const Normalizers& eta,
                        const TrajectorySet& q);

/// Pushes UAV pairs apart along their connecting line until every slot meets
/// the minimum separation. Returns false when a pair coincides exactly.
bool repair_min_separation(TrajectorySet& q, double dmin);

/// SCA loop from a feasible initial trajectory. The initial point is
/// separation-repaired first; a remaining speed or separation violation is a
/// precondition failure (std::invalid_argument).
ScaResult sca_iterate(const Scenario& s, const Assignment& a,
                      const PowerPlan& power, const Normalizers& eta,
                      const TrajectorySet& q_init, const ScaOptions& opts = {});

}  // namespace aircomp
