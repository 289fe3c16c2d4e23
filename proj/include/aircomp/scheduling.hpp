// SPDX-License-Identifier: Apache-2.0
//
// Cluster scheduling and association subproblem: binary linear program solved
// by Lagrange dual ascent. The primal selection picks, per cluster, the D
// cells with the smallest dual-adjusted ratio cost; subgradient steps update
// the multipliers; a final greedy repair enforces the row/column constraints
// that a non-converged dual iterate may violate.
#pragma once

#include <Eigen/Core>

#include "aircomp/channel.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/state.hpp"

namespace aircomp {

/// Achievable-MSE-to-target ratios r_{l,m,n} for hypothetical associations.
struct CostTensor {
  int L = 0, M = 0, N = 0;
  Eigen::VectorXd r;

  CostTensor() = default;
  CostTensor(int l, int m, int n) : L(l), M(m), N(n), r(Eigen::VectorXd::Zero(l * m * n)) {}
  int idx(int l, int m, int n) const { return (l * M + m) * N + n; }
  double at(int l, int m, int n) const { return r[idx(l, m, n)]; }
};

/// Multipliers of the relaxed binary program. `nu` has one entry per (m, n)
/// pair, or per slot in orthogonal (TDMA) mode where the tightened constraint
/// sum_{l,m} a_{l,m}[n] <= 1 replaces the per-UAV one.
struct DualState {
  Eigen::VectorXd lambda;  // L*N, kept normalized to sum 1
  Eigen::VectorXd beta;    // L*N
  Eigen::VectorXd nu;      // M*N (joint) or N (orthogonal)
  bool orthogonal = false;
  int step_count = 0;
};

struct SchedulingOptions {
  double step0 = 1.0;   ///< diminishing step gamma_t = step0 / sqrt(t)
  double tol = 1e-6;    ///< max multiplier change declaring convergence
  int max_iters = 5000;
  bool orthogonal = false;
};

struct SchedulingResult {
  Assignment assignment;
  double gamma = 0.0;        ///< max ratio over active cells
  bool counts_met = false;   ///< every cluster holds exactly D cells
  bool converged = false;    ///< dual iteration converged before the cap
  int iterations = 0;
};

/// r_{l,m,n} = mse_{l,m,n}/eps_l with a_{l,m}[n] forced active and
/// interference taken from the current power plan.
CostTensor hypothetical_ratios(const Scenario& s, const ChannelGains& g,
                               const PowerPlan& power, const Normalizers& eta);

DualState init_dual(int L, int M, int N, bool orthogonal = false);

/// Per-cluster top-D selection at the current multipliers (Theorem-1 step);
/// ties broken by ascending (n, m). Returns the raw selection, which may
/// violate cross-cluster constraints, and its max active ratio.
std::pair<Assignment, double> primal_update(const CostTensor& costs,
                                            const DualState& dual, int D);

/// Projected subgradient step on (beta, nu, lambda); lambda is re-normalized
/// to sum 1 afterwards.
void dual_update(DualState& dual, const Assignment& raw, const CostTensor& costs,
                 double gamma, double step);

/// Full dual loop with repair and incumbent tracking; the best feasible
/// assignment seen (by max active ratio) is returned.
SchedulingResult solve_scheduling(const CostTensor& costs, int D,
                                  const SchedulingOptions& opts = {});

}  // namespace aircomp
