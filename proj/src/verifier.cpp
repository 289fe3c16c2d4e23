// SPDX-License-Identifier: Apache-2.0
#include "aircomp/verifier.hpp"

#include <cmath>
#include <sstream>

namespace aircomp {

namespace {

std::string tag(int l, int n) {
  std::ostringstream os;
  os << "(cluster " << l + 1 << ", slot " << n + 1 << ")";
  return os.str();
}

}  // namespace

std::vector<std::string> verify_state(const Scenario& s, const Assignment& a,
                                      const PowerPlan& power,
                                      const Normalizers& eta,
                                      const TrajectorySet& q,
                                      const VerifyOptions& opts) {
  std::vector<std::string> out;
  const int L = s.num_clusters();
  const int M = s.num_uavs;
  const int N = s.num_slots();
  if (a.L != L || a.M != M || a.N != N || q.M != M || q.N != N ||
      power.K != s.num_devices() || power.N != N) {
    out.push_back("state dimensions do not match the scenario");
    return out;
  }

  // Binary structure: row/column exclusivity.
  for (int n = 0; n < N; ++n) {
    for (int l = 0; l < L; ++l) {
      int row = 0;
      for (int m = 0; m < M; ++m) row += a.active(l, m, n) ? 1 : 0;
      if (row > 1)
        out.push_back("cluster " + std::to_string(l + 1) + " is served by " +
                      std::to_string(row) + " UAVs at slot " + std::to_string(n + 1));
    }
    for (int m = 0; m < M; ++m) {
      int col = 0;
      for (int l = 0; l < L; ++l) col += a.active(l, m, n) ? 1 : 0;
      if (col > 1)
        out.push_back("UAV " + std::to_string(m + 1) + " serves " +
                      std::to_string(col) + " clusters at slot " + std::to_string(n + 1));
    }
  }

  if (opts.required_task_count >= 0)
    for (int l = 0; l < L; ++l) {
      int count = 0;
      for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) count += a.active(l, m, n) ? 1 : 0;
      if (count != opts.required_task_count)
        out.push_back("cluster " + std::to_string(l + 1) + " holds " +
                      std::to_string(count) + " tasks, expected " +
                      std::to_string(opts.required_task_count));
    }

  // Powers: nonnegative, zero off schedule, within budget.
  int flat = 0;
  for (int l = 0; l < L; ++l)
    for (const auto& dev : s.clusters[l].devices) {
      double spent = 0.0;
      for (int n = 0; n < N; ++n) {
        const double p = power.at(flat, n);
        if (p < 0.0)
          out.push_back("negative power at device " + std::to_string(flat + 1) +
                        ", slot " + std::to_string(n + 1));
        bool scheduled = false;
        for (int m = 0; m < M; ++m) scheduled = scheduled || a.active(l, m, n);
        if (!scheduled && p != 0.0)
          out.push_back("device " + std::to_string(flat + 1) +
                        " transmits in unscheduled slot " + std::to_string(n + 1));
        spent += p;
      }
      if (spent > dev.power_budget * (1.0 + opts.budget_rel_tol))
        out.push_back("device " + std::to_string(flat + 1) + " spends " +
                      std::to_string(spent) + " W against a budget of " +
                      std::to_string(dev.power_budget) + " W");
      ++flat;
    }

  // Normalizers: nonnegative, zero on inactive triples.
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        const double e = eta.at(l, m, n);
        if (e < 0.0) out.push_back("negative normalizer at " + tag(l, n));
        if (!a.active(l, m, n) && e != 0.0)
          out.push_back("nonzero normalizer on inactive triple at " + tag(l, n));
      }

  // Trajectory kinematics: per-slot displacement (cyclic, so the return
  // constraint q[0] = q[N] is covered) and pairwise separation.
  const double vlimit = s.phys.vmax * s.phys.delta + opts.speed_tol_m;
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n) {
      const int prev = (n + N - 1) % N;
      const double step = (q.waypoints[m].col(n) - q.waypoints[m].col(prev)).norm();
      if (step > vlimit)
        out.push_back("UAV " + std::to_string(m + 1) + " moves " +
                      std::to_string(step) + " m into slot " + std::to_string(n + 1) +
                      " (limit " + std::to_string(vlimit) + " m)");
    }
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < M; ++m)
      for (int i = m + 1; i < M; ++i) {
        const double sep = (q.waypoints[m].col(n) - q.waypoints[i].col(n)).norm();
        if (sep < s.phys.dmin - opts.collision_tol_m)
          out.push_back("UAVs " + std::to_string(m + 1) + " and " +
                        std::to_string(i + 1) + " are " + std::to_string(sep) +
                        " m apart at slot " + std::to_string(n + 1));
      }

  // MSE targets on scheduled slots, recomputed from first principles.
  const double h2 = s.phys.altitude * s.phys.altitude;
  flat = 0;
  std::vector<int> first_device(L + 1, 0);
  for (int l = 0; l < L; ++l)
    first_device[l + 1] = first_device[l] + static_cast<int>(s.clusters[l].devices.size());
  auto channel_mag = [&](int k, int m, int n) {
    int l = 0;
    while (k >= first_device[l + 1]) ++l;
    const auto& w = s.clusters[l].devices[k - first_device[l]].position;
    const double d2 = h2 + (q.waypoints[m].col(n) - w).squaredNorm();
    return std::sqrt(s.phys.beta0 * std::pow(d2, -s.phys.gamma / 2.0));
  };
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) {
        if (!a.active(l, m, n)) continue;
        const double e = eta.at(l, m, n);
        const int kl = first_device[l + 1] - first_device[l];
        double acc = 0.0;
        for (int k = first_device[l]; k < first_device[l + 1]; ++k) {
          const double t =
              e * channel_mag(k, m, n) * std::sqrt(power.at(k, n)) - 1.0;
          acc += t * t;
        }
        double interf = 0.0;
        for (int k = 0; k < power.K; ++k) {
          if (k >= first_device[l] && k < first_device[l + 1]) continue;
          const double mag = channel_mag(k, m, n);
          interf += power.at(k, n) * mag * mag;
        }
        const double mse =
            (acc + e * e * (interf + s.phys.sigma2)) / (double(kl) * double(kl));
        if (mse > s.clusters[l].epsilon * (1.0 + opts.mse_rel_tol)) {
          std::ostringstream os;
          os << "MSE " << mse << " exceeds target " << s.clusters[l].epsilon
             << " at " << tag(l, n);
          out.push_back(os.str());
        }
      }

  return out;
}

}  // namespace aircomp
