// SPDX-License-Identifier: Apache-2.0
//
// Line-of-sight channel magnitudes and the analytic per-slot computation MSE
// with its misalignment / interference / noise decomposition, plus a
// Monte-Carlo estimator of the same quantity used as an independent oracle.
#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "aircomp/scenario.hpp"
#include "aircomp/state.hpp"

namespace aircomp {

/// Channel amplitude |h_{k,m}[n]| and squared distance per (device, uav, slot).
struct ChannelGains {
  int K = 0, M = 0, N = 0;
  Eigen::VectorXd dist2;  ///< H^2 + ||q_m[n] - w_k||^2  (m^2)
  Eigen::VectorXd mag;    ///< sqrt(beta0) * dist^(-gamma/2)

  ChannelGains() = default;
  ChannelGains(int k, int m, int n)
      : K(k), M(m), N(n),
        dist2(Eigen::VectorXd::Zero(k * m * n)),
        mag(Eigen::VectorXd::Zero(k * m * n)) {}
  int idx(int k, int m, int n) const { return (k * M + m) * N + n; }
  double magnitude(int k, int m, int n) const { return mag[idx(k, m, n)]; }
  double mag2(int k, int m, int n) const {
    const double v = mag[idx(k, m, n)];
    return v * v;
  }
  double distance(int k, int m, int n) const { return std::sqrt(dist2[idx(k, m, n)]); }
};

struct MseBreakdown {
  double misalignment = 0.0;
  double interference = 0.0;
  double noise = 0.0;
  double total = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Fills |h| and squared distances for every (k, m, n). Trajectory must carry
/// exactly N waypoints per UAV.
ChannelGains gains(const Scenario& s, const TrajectorySet& q);

/// Instantaneous MSE of cluster l at slot n under the given state,
/// MSE_{l,n} = sum_m a_{l,m}[n] * mse_{l,m,n}. All-zero when the cluster is
/// unscheduled at n. Negative powers or normalizers are rejected.
MseBreakdown mse_analytic(const Scenario& s, int l, int n, const Assignment& a,
                          const Normalizers& eta, const PowerPlan& power,
                          const ChannelGains& g);

/// Hypothetical mse_{l,m,n} with a_{l,m}[n] forced to 1; interference uses the
/// current power plan. This is the quantity ranked by the scheduling step.
double mse_triple(const Scenario& s, int l, int m, int n, double eta_lmn,
                  const PowerPlan& power, const ChannelGains& g);

/// Simulates the magnitude-aligned received signal with unit-variance symbol
/// draws and AWGN, and estimates E|eta*y/K_l - f_l|^2 with its standard error.
McEstimate mse_montecarlo(const Scenario& s, int l, int n, const Assignment& a,
                          const Normalizers& eta, const PowerPlan& power,
                          const ChannelGains& g, std::int64_t draws,
                          std::uint64_t seed);

}  // namespace aircomp
