// SPDX-License-Identifier: Apache-2.0
//
// Transmit-power subproblem: minimize the max MSE ratio over per-device
// powers with total budgets. Solved as a convex program in amplitude
// variables u = sqrt(p); devices of unscheduled clusters carry no variables
// and end at exactly zero power.
#pragma once

#include <memory>

#include "aircomp/channel.hpp"
#include "aircomp/convex.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/state.hpp"

namespace aircomp {

/// Coefficients of one active (l, m, n) MSE constraint.
struct PowerActiveTriple {
  int l = 0, m = 0, n = 0;
  double noise_term = 0.0;  ///< phi = eta^2 sigma^2
  double mse_scale = 1.0;   ///< eps_l * K_l^2, constraint scaling
  std::vector<int> cluster_devices;     ///< flat ids in K_l
  std::vector<double> theta_cluster;    ///< eta * |h| per cluster device
  std::vector<int> interferer_devices;  ///< flat ids active at slot n, other clusters
  std::vector<double> theta_interferer;
};

struct PowerSubproblemCoeffs {
  int K = 0, N = 0;
  std::vector<PowerActiveTriple> triples;
  std::vector<double> budgets;        ///< per flat device (W)
  std::vector<std::uint8_t> scheduled;  ///< (k, n): device's cluster active at n
};

/// Variable layout of the amplitude program: u variables for scheduled (k, n)
/// pairs in (k, n) order, Gamma last.
struct PowerProgram {
  ConvexProgram program;
  std::vector<int> var_of;  ///< (k*N + n) -> variable index, -1 if eliminated
  int gamma_var = 0;
};

struct PowerOptions {
  SolveOptions convex;
  PowerOptions() { convex.gap_tol = 1e-10; }
};

struct PowerResult {
  PowerPlan power;
  double gamma = 0.0;
  SolveStatus status = SolveStatus::iteration_limit;
  int newton_iters = 0;
};

PowerSubproblemCoeffs build_power_coeffs(const Scenario& s, const Assignment& a,
                                         const Normalizers& eta,
                                         const ChannelGains& g);

PowerProgram build_power_program(const PowerSubproblemCoeffs& coeffs);

/// Full pipeline: coefficients, program, interior-point solve, p = u^2.
/// `warm` (when given) seeds the interior point, scaled strictly inside the
/// budgets.
PowerResult solve_power(const Scenario& s, const Assignment& a,
                        const Normalizers& eta, const ChannelGains& g,
                        const PowerOptions& opts = {},
                        const PowerPlan* warm = nullptr);

}  // namespace aircomp
