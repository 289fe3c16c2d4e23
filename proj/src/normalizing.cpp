// SPDX-License-Identifier: Apache-2.0
#include "aircomp/normalizing.hpp"

#include "aircomp/kernels.hpp"

namespace aircomp {

Normalizers optimal_eta(const Scenario& s, const Assignment& a,
                        const PowerPlan& power, const ChannelGains& g) {
  Normalizers out(a.L, a.M, a.N);
  kernels::eta_closed_form(s, g, power, &a, out);
  return out;
}

Normalizers hypothetical_eta(const Scenario& s, const PowerPlan& power,
                             const ChannelGains& g) {
  Normalizers out(s.num_clusters(), s.num_uavs, s.num_slots());
  kernels::eta_closed_form(s, g, power, nullptr, out);
  return out;
}

double eta_gamma(const Scenario& s, const Assignment& a, const PowerPlan& power,
                 const Normalizers& eta, const ChannelGains& g) {
  double gamma = 0.0;
  for (int l = 0; l < a.L; ++l)
    for (int n = 0; n < a.N; ++n) {
      if (a.uav_of(l, n) < 0) continue;
      const auto mse = mse_analytic(s, l, n, a, eta, power, g);
      gamma = std::max(gamma, mse.total / s.clusters[l].epsilon);
    }
  return gamma;
}

}  // namespace aircomp
