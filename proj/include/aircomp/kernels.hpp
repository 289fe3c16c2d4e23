// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops of the solver, OpenMP-parallelized over
// independent output cells (or independently seeded draw blocks), so results
// are bit-identical to the serial reference for any thread count. The serial
// twins live in kernels::ref and are kept for tests and the kernel benchmark.
#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "aircomp/channel.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/state.hpp"

namespace aircomp::kernels {

/// Monte-Carlo instance in reduced form: per-device received amplitudes
/// eta-free (sqrt(p_k)*|h_k|) for the serving cluster and for interferers.
struct McProblem {
  double eta = 0.0;
  double sigma2 = 0.0;
  int cluster_size = 0;            // K_l
  Eigen::VectorXd signal_amp;      // K_l entries
  Eigen::VectorXd interferer_amp;  // devices of other clusters with p > 0
};

struct McAccum {
  double mean = 0.0;
  double std_error = 0.0;
};

void gains_fill(const Scenario& s, const TrajectorySet& q, ChannelGains& out);

/// Hypothetical MSE-to-target ratios r_{l,m,n} = mse_{l,m,n}/eps_l with
/// a_{l,m}[n] forced active; out is sized L*M*N (cluster-major).
void ratio_tensor(const Scenario& s, const ChannelGains& g, const PowerPlan& p,
                  const Normalizers& eta, Eigen::VectorXd& out);

/// Closed-form optimal normalizers. With `a` non-null only active triples get
/// a value (others are zeroed); with `a` null every triple is treated as
/// hypothetically active.
void eta_closed_form(const Scenario& s, const ChannelGains& g, const PowerPlan& p,
                     const Assignment* a, Normalizers& out);

McAccum mc_run(const McProblem& prob, std::int64_t draws, std::uint64_t seed);

namespace ref {
void gains_fill(const Scenario& s, const TrajectorySet& q, ChannelGains& out);
void ratio_tensor(const Scenario& s, const ChannelGains& g, const PowerPlan& p,
                  const Normalizers& eta, Eigen::VectorXd& out);
void eta_closed_form(const Scenario& s, const ChannelGains& g, const PowerPlan& p,
                     const Assignment* a, Normalizers& out);
McAccum mc_run(const McProblem& prob, std::int64_t draws, std::uint64_t seed);
}  // namespace ref

}  // namespace aircomp::kernels
