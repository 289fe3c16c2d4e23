// SPDX-License-Identifier: Apache-2.0
#include "aircomp/kernels.hpp"

#include <cmath>
#include <vector>

#include "aircomp/rng.hpp"

namespace aircomp::kernels {

namespace {

constexpr std::int64_t kMcBlock = 8192;

struct ClusterIndex {
  std::vector<int> offset;  // L+1 entries, devices are cluster-major
  int K = 0;
  explicit ClusterIndex(const Scenario& s) {
    offset.resize(s.num_clusters() + 1, 0);
    for (int l = 0; l < s.num_clusters(); ++l)
      offset[l + 1] = offset[l] + static_cast<int>(s.clusters[l].devices.size());
    K = offset.back();
  }
};

inline void gains_row(const Scenario& s, const TrajectorySet& q,
                      const Eigen::Vector2d& w, int k, int m, ChannelGains& out) {
  const double h2 = s.phys.altitude * s.phys.altitude;
  const double sqrt_beta0 = std::sqrt(s.phys.beta0);
  const double expo = -s.phys.gamma / 4.0;
  for (int n = 0; n < out.N; ++n) {
    const double d2 = h2 + (q.slot_position(m, n) - w).squaredNorm();
    const int i = out.idx(k, m, n);
    out.dist2[i] = d2;
    out.mag[i] = sqrt_beta0 * std::pow(d2, expo);
  }
}

inline double ratio_cell(const Scenario& s, const ClusterIndex& ci,
                         const ChannelGains& g, const PowerPlan& p,
                         double eta, int l, int m, int n) {
  const int kl = ci.offset[l + 1] - ci.offset[l];
  double mis = 0.0;
  for (int k = ci.offset[l]; k < ci.offset[l + 1]; ++k) {
    const double d = eta * g.magnitude(k, m, n) * std::sqrt(p.at(k, n)) - 1.0;
    mis += d * d;
  }
  double interf = 0.0;
  for (int k = 0; k < ci.K; ++k) {
    if (k >= ci.offset[l] && k < ci.offset[l + 1]) continue;
    interf += p.at(k, n) * g.mag2(k, m, n);
  }
  const double mse =
      (mis + eta * eta * (interf + s.phys.sigma2)) / (double(kl) * double(kl));
  return mse / s.clusters[l].epsilon;
}

inline double eta_cell(const Scenario& s, const ClusterIndex& ci,
                       const ChannelGains& g, const PowerPlan& p, int l, int m,
                       int n) {
  double num = 0.0;
  for (int k = ci.offset[l]; k < ci.offset[l + 1]; ++k)
    num += std::sqrt(p.at(k, n)) * g.magnitude(k, m, n);
  double den = s.phys.sigma2;
  for (int k = 0; k < ci.K; ++k) den += p.at(k, n) * g.mag2(k, m, n);
  return num / den;
}

inline void mc_block(const McProblem& prob, std::int64_t count, std::uint64_t seed,
                     double& sum, double& sumsq) {
  Rng rng(seed);
  const double inv_k = 1.0 / prob.cluster_size;
  sum = 0.0;
  sumsq = 0.0;
  const double noise_scale = prob.eta * std::sqrt(prob.sigma2);
  for (std::int64_t d = 0; d < count; ++d) {
    double acc = 0.0;
    for (int k = 0; k < prob.signal_amp.size(); ++k)
      acc += (prob.eta * prob.signal_amp[k] - 1.0) * rng.normal();
    for (int i = 0; i < prob.interferer_amp.size(); ++i)
      acc += prob.eta * prob.interferer_amp[i] * rng.normal();
    acc += noise_scale * rng.normal();
    const double err = acc * inv_k;
    const double x = err * err;
    sum += x;
    sumsq += x * x;
  }
}

McAccum mc_combine(const std::vector<double>& sums, const std::vector<double>& sumsqs,
                   std::int64_t draws) {
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    sum += sums[b];
    sumsq += sumsqs[b];
  }
  McAccum out;
  out.mean = sum / double(draws);
  if (draws > 1) {
    const double var = (sumsq - double(draws) * out.mean * out.mean) / double(draws - 1);
    out.std_error = std::sqrt(std::max(var, 0.0) / double(draws));
  }
  return out;
}

std::vector<Eigen::Vector2d> device_positions(const Scenario& s) {
  std::vector<Eigen::Vector2d> w;
  w.reserve(s.num_devices());
  for (const auto& c : s.clusters)
    for (const auto& d : c.devices) w.push_back(d.position);
  return w;
}

}  // namespace

void gains_fill(const Scenario& s, const TrajectorySet& q, ChannelGains& out) {
  const auto w = device_positions(s);
  const int rows = out.K * out.M;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    gains_row(s, q, w[r / out.M], r / out.M, r % out.M, out);
}

void ref::gains_fill(const Scenario& s, const TrajectorySet& q, ChannelGains& out) {
  const auto w = device_positions(s);
  const int rows = out.K * out.M;
  for (int r = 0; r < rows; ++r)
    gains_row(s, q, w[r / out.M], r / out.M, r % out.M, out);
}

void ratio_tensor(const Scenario& s, const ChannelGains& g, const PowerPlan& p,
                  const Normalizers& eta, Eigen::VectorXd& out) {
  const ClusterIndex ci(s);
  const int cells = eta.L * eta.M * eta.N;
  out.resize(cells);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < cells; ++c) {
    const int n = c % eta.N, m = (c / eta.N) % eta.M, l = c / (eta.N * eta.M);
    out[c] = ratio_cell(s, ci, g, p, eta.eta[c], l, m, n);
  }
}

void ref::ratio_tensor(const Scenario& s, const ChannelGains& g, const PowerPlan& p,
                       const Normalizers& eta, Eigen::VectorXd& out) {
  const ClusterIndex ci(s);
  const int cells = eta.L * eta.M * eta.N;
  out.resize(cells);
  for (int c = 0; c < cells; ++c) {
    const int n = c % eta.N, m = (c / eta.N) % eta.M, l = c / (eta.N * eta.M);
    out[c] = ratio_cell(s, ci, g, p, eta.eta[c], l, m, n);
  }
}

void eta_closed_form(const Scenario& s, const ChannelGains& g, const PowerPlan& p,
                     const Assignment* a, Normalizers& out) {
  const ClusterIndex ci(s);
  const int cells = out.L * out.M * out.N;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < cells; ++c) {
    const int n = c % out.N, m = (c / out.N) % out.M, l = c / (out.N * out.M);
    out.eta[c] = (a && !a->active(l, m, n)) ? 0.0 : eta_cell(s, ci, g, p, l, m, n);
  }
}

void ref::eta_closed_form(const Scenario& s, const ChannelGains& g,
                          const PowerPlan& p, const Assignment* a,
                          Normalizers& out) {
  const ClusterIndex ci(s);
  const int cells = out.L * out.M * out.N;
  for (int c = 0; c < cells; ++c) {
    const int n = c % out.N, m = (c / out.N) % out.M, l = c / (out.N * out.M);
    out.eta[c] = (a && !a->active(l, m, n)) ? 0.0 : eta_cell(s, ci, g, p, l, m, n);
  }
}

McAccum mc_run(const McProblem& prob, std::int64_t draws, std::uint64_t seed) {
  const std::int64_t blocks = (draws + kMcBlock - 1) / kMcBlock;
  std::vector<double> sums(blocks), sumsqs(blocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::int64_t count = std::min(kMcBlock, draws - b * kMcBlock);
    mc_block(prob, count, derive_seed(seed, std::uint64_t(b)), sums[b], sumsqs[b]);
  }
  return mc_combine(sums, sumsqs, draws);
}

McAccum ref::mc_run(const McProblem& prob, std::int64_t draws, std::uint64_t seed) {
  const std::int64_t blocks = (draws + kMcBlock - 1) / kMcBlock;
  std::vector<double> sums(blocks), sumsqs(blocks);
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::int64_t count = std::min(kMcBlock, draws - b * kMcBlock);
    mc_block(prob, count, derive_seed(seed, std::uint64_t(b)), sums[b], sumsqs[b]);
  }
  return mc_combine(sums, sumsqs, draws);
}

}  // namespace aircomp::kernels
