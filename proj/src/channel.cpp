// SPDX-License-Identifier: Apache-2.0
#include "aircomp/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "aircomp/kernels.hpp"

namespace aircomp {

ChannelGains gains(const Scenario& s, const TrajectorySet& q) {
  const int n = s.num_slots();
  if (q.M != s.num_uavs || q.N != n)
    throw std::invalid_argument("trajectory dimensions do not match scenario");
  ChannelGains out(s.num_devices(), s.num_uavs, n);
  kernels::gains_fill(s, q, out);
  return out;
}

namespace {

void check_state(const Normalizers& eta, const PowerPlan& power) {
  if ((eta.eta.array() < 0.0).any())
    throw std::invalid_argument("normalizers must be nonnegative");
  if ((power.p.array() < 0.0).any())
    throw std::invalid_argument("powers must be nonnegative");
}

}  // namespace

MseBreakdown mse_analytic(const Scenario& s, int l, int n, const Assignment& a,
                          const Normalizers& eta, const PowerPlan& power,
                          const ChannelGains& g) {
  check_state(eta, power);
  MseBreakdown out;
  const int k0 = s.device_offset(l);
  const int kl = static_cast<int>(s.clusters[l].devices.size());
  const double kl2 = double(kl) * double(kl);
  for (int m = 0; m < a.M; ++m) {
    if (!a.active(l, m, n)) continue;
    const double e = eta.at(l, m, n);
    double mis = 0.0;
    for (int k = k0; k < k0 + kl; ++k) {
      const double d = e * g.magnitude(k, m, n) * std::sqrt(power.at(k, n)) - 1.0;
      mis += d * d;
    }
    double interf = 0.0;
    for (int k = 0; k < g.K; ++k) {
      if (k >= k0 && k < k0 + kl) continue;
      interf += power.at(k, n) * g.mag2(k, m, n);
    }
    out.misalignment += mis / kl2;
    out.interference += e * e * interf / kl2;
    out.noise += e * e * s.phys.sigma2 / kl2;
  }
  out.total = out.misalignment + out.interference + out.noise;
  return out;
}

double mse_triple(const Scenario& s, int l, int m, int n, double eta_lmn,
                  const PowerPlan& power, const ChannelGains& g) {
  const int k0 = s.device_offset(l);
  const int kl = static_cast<int>(s.clusters[l].devices.size());
  double mis = 0.0;
  for (int k = k0; k < k0 + kl; ++k) {
    const double d = eta_lmn * g.magnitude(k, m, n) * std::sqrt(power.at(k, n)) - 1.0;
    mis += d * d;
  }
  double interf = 0.0;
  for (int k = 0; k < g.K; ++k) {
    if (k >= k0 && k < k0 + kl) continue;
    interf += power.at(k, n) * g.mag2(k, m, n);
  }
  return (mis + eta_lmn * eta_lmn * (interf + s.phys.sigma2)) / (double(kl) * double(kl));
}

McEstimate mse_montecarlo(const Scenario& s, int l, int n, const Assignment& a,
                          const Normalizers& eta, const PowerPlan& power,
                          const ChannelGains& g, std::int64_t draws,
                          std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("draw count must be at least 1");
  check_state(eta, power);
  const int m = a.uav_of(l, n);
  if (m < 0) return {};  // unscheduled cluster aggregates nothing
  const int k0 = s.device_offset(l);
  const int kl = static_cast<int>(s.clusters[l].devices.size());

  kernels::McProblem prob;
  prob.eta = eta.at(l, m, n);
  prob.sigma2 = s.phys.sigma2;
  prob.cluster_size = kl;
  prob.signal_amp.resize(kl);
  for (int k = 0; k < kl; ++k)
    prob.signal_amp[k] = std::sqrt(power.at(k0 + k, n)) * g.magnitude(k0 + k, m, n);
  std::vector<double> interf;
  for (int k = 0; k < g.K; ++k) {
    if (k >= k0 && k < k0 + kl) continue;
    if (power.at(k, n) > 0.0)
      interf.push_back(std::sqrt(power.at(k, n)) * g.magnitude(k, m, n));
  }
  prob.interferer_amp = Eigen::Map<Eigen::VectorXd>(interf.data(), interf.size());

  const auto acc = kernels::mc_run(prob, draws, seed);
  return {acc.mean, acc.std_error};
}

}  // namespace aircomp
