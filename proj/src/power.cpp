// SPDX-License-Identifier: Apache-2.0
#include "aircomp/power.hpp"

#include <cmath>

namespace aircomp {

PowerSubproblemCoeffs build_power_coeffs(const Scenario& s, const Assignment& a,
                                         const Normalizers& eta,
                                         const ChannelGains& g) {
  PowerSubproblemCoeffs c;
  c.K = s.num_devices();
  c.N = s.num_slots();
  c.budgets.resize(c.K);
  for (int k = 0; k < c.K; ++k) c.budgets[k] = s.device(k).power_budget;
  c.scheduled.assign(c.K * c.N, 0);
  for (int l = 0; l < a.L; ++l) {
    const int k0 = s.device_offset(l);
    const int kl = static_cast<int>(s.clusters[l].devices.size());
    for (int n = 0; n < a.N; ++n)
      if (a.uav_of(l, n) >= 0)
        for (int k = k0; k < k0 + kl; ++k) c.scheduled[k * c.N + n] = 1;
  }
  for (int l = 0; l < a.L; ++l)
    for (int m = 0; m < a.M; ++m)
      for (int n = 0; n < a.N; ++n) {
        if (!a.active(l, m, n)) continue;
        PowerActiveTriple t;
        t.l = l;
        t.m = m;
        t.n = n;
        const double e = eta.at(l, m, n);
        t.noise_term = e * e * s.phys.sigma2;
        const int kl = static_cast<int>(s.clusters[l].devices.size());
        t.mse_scale = s.clusters[l].epsilon * double(kl) * double(kl);
        const int k0 = s.device_offset(l);
        for (int k = k0; k < k0 + kl; ++k) {
          t.cluster_devices.push_back(k);
          t.theta_cluster.push_back(e * g.magnitude(k, m, n));
        }
        for (int k = 0; k < c.K; ++k) {
          if (k >= k0 && k < k0 + kl) continue;
          if (!c.scheduled[k * c.N + n]) continue;
          t.interferer_devices.push_back(k);
          t.theta_interferer.push_back(e * g.magnitude(k, m, n));
        }
        c.triples.push_back(std::move(t));
      }
  return c;
}

PowerProgram build_power_program(const PowerSubproblemCoeffs& coeffs) {
  PowerProgram out;
  out.var_of.assign(coeffs.K * coeffs.N, -1);
  int nv = 0;
  for (int k = 0; k < coeffs.K; ++k)
    for (int n = 0; n < coeffs.N; ++n)
      if (coeffs.scheduled[k * coeffs.N + n]) out.var_of[k * coeffs.N + n] = nv++;
  out.gamma_var = nv;
  auto& prog = out.program;
  prog.dim = nv + 1;
  prog.cost = Eigen::VectorXd::Zero(prog.dim);
  prog.cost[out.gamma_var] = 1.0;

  for (const auto& t : coeffs.triples) {
    Constraint con;
    const int na = static_cast<int>(t.cluster_devices.size());
    const int ni = static_cast<int>(t.interferer_devices.size());
    for (int i = 0; i < na; ++i)
      con.vars.push_back(out.var_of[t.cluster_devices[i] * coeffs.N + t.n]);
    for (int i = 0; i < ni; ++i)
      con.vars.push_back(out.var_of[t.interferer_devices[i] * coeffs.N + t.n]);
    con.vars.push_back(out.gamma_var);
    const int dim = na + ni + 1;
    std::vector<double> th(na + ni);
    for (int i = 0; i < na; ++i) th[i] = t.theta_cluster[i];
    for (int i = 0; i < ni; ++i) th[na + i] = t.theta_interferer[i];
    const double inv_scale = 1.0 / t.mse_scale;
    const double phi = t.noise_term;
    con.eval = [th, na, ni, dim, inv_scale, phi](const double* x, double* grad,
                                                 double* hess) {
      double v = phi;
      for (int i = 0; i < na; ++i) {
        const double d = th[i] * x[i] - 1.0;
        v += d * d;
      }
      for (int i = na; i < na + ni; ++i) v += th[i] * th[i] * x[i] * x[i];
      const double g = v * inv_scale - x[dim - 1];
      if (grad) {
        for (int i = 0; i < na; ++i)
          grad[i] = 2.0 * th[i] * (th[i] * x[i] - 1.0) * inv_scale;
        for (int i = na; i < na + ni; ++i)
          grad[i] = 2.0 * th[i] * th[i] * x[i] * inv_scale;
        grad[dim - 1] = -1.0;
      }
      if (hess) {
        for (int i = 0; i < dim * dim; ++i) hess[i] = 0.0;
        for (int i = 0; i < na + ni; ++i)
          hess[i * dim + i] = 2.0 * th[i] * th[i] * inv_scale;
      }
      return g;
    };
    prog.constraints.push_back(std::move(con));
  }

  for (int k = 0; k < coeffs.K; ++k) {
    Constraint con;
    for (int n = 0; n < coeffs.N; ++n)
      if (coeffs.scheduled[k * coeffs.N + n])
        con.vars.push_back(out.var_of[k * coeffs.N + n]);
    if (con.vars.empty()) continue;
    const int dim = static_cast<int>(con.vars.size());
    const double inv_budget = 1.0 / coeffs.budgets[k];
    con.eval = [dim, inv_budget](const double* x, double* grad, double* hess) {
      double v = 0.0;
      for (int i = 0; i < dim; ++i) v += x[i] * x[i];
      if (grad)
        for (int i = 0; i < dim; ++i) grad[i] = 2.0 * x[i] * inv_budget;
      if (hess) {
        for (int i = 0; i < dim * dim; ++i) hess[i] = 0.0;
        for (int i = 0; i < dim; ++i) hess[i * dim + i] = 2.0 * inv_budget;
      }
      return v * inv_budget - 1.0;
    };
    prog.constraints.push_back(std::move(con));
  }
  return out;
}

PowerResult solve_power(const Scenario& s, const Assignment& a,
                        const Normalizers& eta, const ChannelGains& g,
                        const PowerOptions& opts, const PowerPlan* warm) {
  const auto coeffs = build_power_coeffs(s, a, eta, g);
  auto pp = build_power_program(coeffs);

  PowerResult res;
  res.power = PowerPlan(coeffs.K, coeffs.N);
  if (pp.program.dim == 1) {  // nothing scheduled anywhere
    res.gamma = 0.0;
    res.status = SolveStatus::optimal;
    return res;
  }

  // Interior start: warm amplitudes pulled strictly inside the budgets, Gamma
  // at twice the implied max ratio.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(pp.program.dim);
  if (warm) {
    for (int k = 0; k < coeffs.K; ++k) {
      double spent = 0.0;
      for (int n = 0; n < coeffs.N; ++n)
        if (pp.var_of[k * coeffs.N + n] >= 0) spent += warm->at(k, n);
      const double shrink =
          spent > 0.0 ? std::min(1.0, 0.99 * std::sqrt(coeffs.budgets[k] / spent))
                      : 1.0;
      for (int n = 0; n < coeffs.N; ++n) {
        const int v = pp.var_of[k * coeffs.N + n];
        if (v >= 0) x0[v] = shrink * std::sqrt(warm->at(k, n));
      }
    }
  }
  double max_ratio = 0.0;
  std::vector<double> xloc;
  for (std::size_t i = 0; i < coeffs.triples.size(); ++i) {
    const auto& con = pp.program.constraints[i];
    xloc.resize(con.vars.size());
    for (std::size_t j = 0; j < con.vars.size(); ++j) xloc[j] = x0[con.vars[j]];
    max_ratio = std::max(max_ratio,
                         con.eval(xloc.data(), nullptr, nullptr) + xloc.back());
  }
  x0[pp.gamma_var] = 2.0 * max_ratio + 1e-9;

  SolveOptions so = opts.convex;
  so.x0 = x0;
  const SolveReport rep = solve(pp.program, so);
  res.status = rep.status;
  res.newton_iters = rep.newton_iters;
  res.gamma = rep.x[pp.gamma_var];
  for (int k = 0; k < coeffs.K; ++k)
    for (int n = 0; n < coeffs.N; ++n) {
      const int v = pp.var_of[k * coeffs.N + n];
      res.power.at(k, n) = v >= 0 ? rep.x[v] * rep.x[v] : 0.0;
    }
  return res;
}

}  // namespace aircomp
