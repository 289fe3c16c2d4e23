// SPDX-License-Identifier: Apache-2.0
#include "aircomp/trajectory.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "aircomp/normalizing.hpp"

namespace aircomp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

inline int qvar(int m, int n, int coord, int N) { return (m * N + n) * 2 + coord; }
}  // namespace

ScaExpansionPoint make_expansion(const Scenario& s, const Assignment& a,
                                 const PowerPlan& power, const Normalizers& eta,
                                 const TrajectorySet& q_ref) {
  ScaExpansionPoint out;
  out.q_ref = q_ref;
  const double beta0 = s.phys.beta0;
  const double gamma_exp = s.phys.gamma;
  const double h2 = s.phys.altitude * s.phys.altitude;
  for (int l = 0; l < a.L; ++l)
    for (int m = 0; m < a.M; ++m)
      for (int n = 0; n < a.N; ++n) {
        if (!a.active(l, m, n)) continue;
        ScaTripleCache t;
        t.l = l;
        t.m = m;
        t.n = n;
        const double e = eta.at(l, m, n);
        const int kl = static_cast<int>(s.clusters[l].devices.size());
        const int k0 = s.device_offset(l);
        t.c_const = double(kl) + e * e * s.phys.sigma2;
        t.scale = s.clusters[l].epsilon * double(kl) * double(kl);
        const Eigen::Vector2d qr = q_ref.slot_position(m, n);
        for (int k = 0; k < s.num_devices(); ++k) {
          const double p = power.at(k, n);
          if (p <= 0.0) continue;
          const Eigen::Vector2d w = s.device(k).position;
          const double sr = (qr - w).squaredNorm();
          t.g_anchor.push_back(qr - w);
          t.g_sr.push_back(sr);
          t.g_coef.push_back(e * e * p * beta0);
          t.g_device.push_back(k);
          if (k >= k0 && k < k0 + kl) {
            const double amp = 2.0 * e * std::sqrt(beta0 * p);
            t.f_ref += amp * std::pow(h2 + sr, -gamma_exp / 4.0);
            t.f_w.push_back(w);
            t.f_sr.push_back(sr);
            // d/ds of amp*(H^2+s)^(-gamma/4)
            t.f_slope.push_back(-amp * (gamma_exp / 4.0) *
                                std::pow(h2 + sr, -gamma_exp / 4.0 - 1.0));
          }
        }
        out.triples.push_back(std::move(t));
      }
  return out;
}

namespace {

/// Shared constraint generators for the substituted and explicit builders.
struct Builder {
  const Scenario* s;
  const ScaExpansionPoint* exp;
  TrajectoryProgram out;
  double h2, gexp, vdelta2, dmin2;

  Builder(const Scenario& sc, const ScaExpansionPoint& e) : s(&sc), exp(&e) {
    h2 = sc.phys.altitude * sc.phys.altitude;
    gexp = sc.phys.gamma;
    const double vd = sc.phys.vmax * sc.phys.delta;
    vdelta2 = vd * vd;
    dmin2 = sc.phys.dmin * sc.phys.dmin;
    out.M = e.q_ref.M;
    out.N = e.q_ref.N;
  }

  void add_speed_constraints() {
    const int N = out.N;
    for (int m = 0; m < out.M; ++m)
      for (int n = 0; n < N; ++n) {
        const int prev = (n + N - 1) % N;  // q[0] = q[N]: cyclic chain
        Constraint c;
        c.vars = {qvar(m, n, 0, N), qvar(m, n, 1, N), qvar(m, prev, 0, N),
                  qvar(m, prev, 1, N)};
        const double inv = 1.0 / vdelta2;
        c.eval = [inv](const double* x, double* grad, double* hess) {
          const double dx = x[0] - x[2], dy = x[1] - x[3];
          if (grad) {
            grad[0] = 2.0 * dx * inv;
            grad[1] = 2.0 * dy * inv;
            grad[2] = -2.0 * dx * inv;
            grad[3] = -2.0 * dy * inv;
          }
          if (hess) {
            for (int i = 0; i < 16; ++i) hess[i] = 0.0;
            hess[0 * 4 + 0] = hess[1 * 4 + 1] = 2.0 * inv;
            hess[2 * 4 + 2] = hess[3 * 4 + 3] = 2.0 * inv;
            hess[0 * 4 + 2] = hess[2 * 4 + 0] = -2.0 * inv;
            hess[1 * 4 + 3] = hess[3 * 4 + 1] = -2.0 * inv;
          }
          return (dx * dx + dy * dy) * inv - 1.0;
        };
        out.program.constraints.push_back(std::move(c));
      }
  }

  void add_collision_constraints() {
    if (out.M < 2) return;
    const int N = out.N;
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < out.M; ++m)
        for (int i = m + 1; i < out.M; ++i) {
          const Eigen::Vector2d d =
              exp->q_ref.slot_position(m, n) - exp->q_ref.slot_position(i, n);
          Constraint c;
          c.vars = {qvar(m, n, 0, N), qvar(m, n, 1, N), qvar(i, n, 0, N),
                    qvar(i, n, 1, N)};
          // dmin^2 - d_lb <= 0 with d_lb = -||d_r||^2 + 2 d_r . (q_m - q_i)
          const double dr2 = d.squaredNorm();
          const double ax = 2.0 * d.x(), ay = 2.0 * d.y();
          const double inv = 1.0 / dmin2;
          const double lim = dmin2;
          c.eval = [dr2, ax, ay, inv, lim](const double* x, double* grad,
                                           double* hess) {
            const double dlb = -dr2 + ax * (x[0] - x[2]) + ay * (x[1] - x[3]);
            if (grad) {
              grad[0] = -ax * inv;
              grad[1] = -ay * inv;
              grad[2] = ax * inv;
              grad[3] = ay * inv;
            }
            if (hess)
              for (int j = 0; j < 16; ++j) hess[j] = 0.0;
            return (lim - dlb) * inv;
          };
          out.program.constraints.push_back(std::move(c));
        }
  }

  /// MSE constraint of one triple with slacks substituted by their binding
  /// linear lower bound.
  void add_mse_substituted(const ScaTripleCache& t, int gamma_var) {
    const int N = out.N;
    Constraint c;
    c.vars = {qvar(t.m, t.n, 0, N), qvar(t.m, t.n, 1, N), gamma_var};
    const Eigen::Vector2d qr = exp->q_ref.slot_position(t.m, t.n);
    const double inv_scale = 1.0 / t.scale;
    const ScaTripleCache* tc = &t;
    const double lh2 = h2, lg = gexp;
    c.eval = [tc, qr, inv_scale, lh2, lg](const double* x, double* grad,
                                          double* hess) {
      const Eigen::Vector2d q(x[0], x[1]);
      const Eigen::Vector2d dq = q - qr;
      double value = tc->c_const - tc->f_ref;
      Eigen::Vector2d gvec = Eigen::Vector2d::Zero();
      Eigen::Matrix2d hmat = Eigen::Matrix2d::Zero();
      const std::size_t ng = tc->g_coef.size();
      for (std::size_t k = 0; k < ng; ++k) {
        const double sk = tc->g_sr[k] + 2.0 * tc->g_anchor[k].dot(dq);
        const double base = lh2 + sk;
        if (!(base > 1e-9)) return kInf;  // out of the surrogate's domain
        const double pw = std::pow(base, -lg / 2.0);
        value += tc->g_coef[k] * pw;
        if (grad) {
          const double d1 = tc->g_coef[k] * (-lg / 2.0) * pw / base;
          gvec += d1 * 2.0 * tc->g_anchor[k];
          if (hess) {
            const double d2 = tc->g_coef[k] * (lg / 2.0) * (lg / 2.0 + 1.0) * pw /
                              (base * base);
            hmat += 4.0 * d2 * tc->g_anchor[k] * tc->g_anchor[k].transpose();
          }
        }
      }
      for (std::size_t k = 0; k < tc->f_w.size(); ++k) {
        const double dist2 = (q - tc->f_w[k]).squaredNorm();
        value -= tc->f_slope[k] * (dist2 - tc->f_sr[k]);
        if (grad) gvec -= tc->f_slope[k] * 2.0 * (q - tc->f_w[k]);
        if (hess) {
          hmat(0, 0) -= 2.0 * tc->f_slope[k];
          hmat(1, 1) -= 2.0 * tc->f_slope[k];
        }
      }
      if (grad) {
        grad[0] = gvec.x() * inv_scale;
        grad[1] = gvec.y() * inv_scale;
        grad[2] = -1.0;
      }
      if (hess) {
        for (int i = 0; i < 9; ++i) hess[i] = 0.0;
        hess[0] = hmat(0, 0) * inv_scale;
        hess[1] = hmat(0, 1) * inv_scale;
        hess[3] = hmat(1, 0) * inv_scale;
        hess[4] = hmat(1, 1) * inv_scale;
      }
      return value * inv_scale - x[2];
    };
    out.program.constraints.push_back(std::move(c));
  }

  /// Trust half-plane D_lb >= 0 keeping the linearized squared distance (the
  /// eliminated slack's upper bound) nonnegative, as in the slack variant.
  void add_dlb_nonneg(const ScaTripleCache& t, std::size_t k) {
    const int N = out.N;
    Constraint c;
    c.vars = {qvar(t.m, t.n, 0, N), qvar(t.m, t.n, 1, N)};
    const Eigen::Vector2d qr = exp->q_ref.slot_position(t.m, t.n);
    const Eigen::Vector2d a = t.g_anchor[k];
    const double sr = t.g_sr[k];
    const double inv = 1.0 / (h2 + sr);
    c.eval = [qr, a, sr, inv](const double* x, double* grad, double* hess) {
      const double dlb = sr + 2.0 * (a.x() * (x[0] - qr.x()) + a.y() * (x[1] - qr.y()));
      if (grad) {
        grad[0] = -2.0 * a.x() * inv;
        grad[1] = -2.0 * a.y() * inv;
      }
      if (hess)
        for (int i = 0; i < 4; ++i) hess[i] = 0.0;
      return -dlb * inv;
    };
    out.program.constraints.push_back(std::move(c));
  }
};

}  // namespace

TrajectoryProgram build_sca_program(const Scenario& s, const ScaExpansionPoint& exp) {
  Builder b(s, exp);
  const int nq = 2 * b.out.M * b.out.N;
  b.out.gamma_var = nq;
  b.out.program.dim = nq + 1;
  b.out.program.cost = Eigen::VectorXd::Zero(nq + 1);
  b.out.program.cost[nq] = 1.0;
  for (const auto& t : exp.triples) {
    b.add_mse_substituted(t, b.out.gamma_var);
    for (std::size_t k = 0; k < t.g_coef.size(); ++k) b.add_dlb_nonneg(t, k);
  }
  b.add_speed_constraints();
  b.add_collision_constraints();
  return std::move(b.out);
}

TrajectoryProgram build_sca_program_explicit(const Scenario& s,
                                             const ScaExpansionPoint& exp) {
  Builder b(s, exp);
  const int N = b.out.N;
  const int nq = 2 * b.out.M * N;

  // One slack per (device, uav, slot) that appears in a quadratic-gain term.
  std::map<std::tuple<int, int, int>, int> slack_of;
  for (const auto& t : exp.triples)
    for (std::size_t k = 0; k < t.g_device.size(); ++k)
      slack_of.try_emplace({t.g_device[k], t.m, t.n}, 0);
  int idx = nq;
  for (auto& [key, v] : slack_of) v = idx++;
  b.out.gamma_var = idx;
  b.out.num_slack = static_cast<int>(slack_of.size());
  b.out.program.dim = idx + 1;
  b.out.program.cost = Eigen::VectorXd::Zero(idx + 1);
  b.out.program.cost[idx] = 1.0;

  const double h2 = b.h2, gexp = b.gexp;
  for (const auto& t : exp.triples) {
    Constraint c;
    const std::size_t ng = t.g_device.size();
    for (std::size_t k = 0; k < ng; ++k)
      c.vars.push_back(slack_of.at({t.g_device[k], t.m, t.n}));
    c.vars.push_back(qvar(t.m, t.n, 0, N));
    c.vars.push_back(qvar(t.m, t.n, 1, N));
    c.vars.push_back(b.out.gamma_var);
    const ScaTripleCache* tc = &t;
    const double inv_scale = 1.0 / t.scale;
    const int dim = static_cast<int>(ng) + 3;
    c.eval = [tc, inv_scale, h2, gexp, dim](const double* x, double* grad,
                                            double* hess) {
      const std::size_t ng = tc->g_coef.size();
      const Eigen::Vector2d q(x[ng], x[ng + 1]);
      double value = tc->c_const - tc->f_ref;
      if (hess)
        for (int i = 0; i < dim * dim; ++i) hess[i] = 0.0;
      for (std::size_t k = 0; k < ng; ++k) {
        const double base = h2 + x[k];
        if (!(base > 1e-9)) return kInf;
        const double pw = std::pow(base, -gexp / 2.0);
        value += tc->g_coef[k] * pw;
        if (grad) grad[k] = tc->g_coef[k] * (-gexp / 2.0) * pw / base * inv_scale;
        if (hess)
          hess[k * dim + k] = tc->g_coef[k] * (gexp / 2.0) * (gexp / 2.0 + 1.0) *
                              pw / (base * base) * inv_scale;
      }
      Eigen::Vector2d gvec = Eigen::Vector2d::Zero();
      double hdiag = 0.0;
      for (std::size_t k = 0; k < tc->f_w.size(); ++k) {
        const double dist2 = (q - tc->f_w[k]).squaredNorm();
        value -= tc->f_slope[k] * (dist2 - tc->f_sr[k]);
        gvec -= tc->f_slope[k] * 2.0 * (q - tc->f_w[k]);
        hdiag -= 2.0 * tc->f_slope[k];
      }
      if (grad) {
        grad[ng] = gvec.x() * inv_scale;
        grad[ng + 1] = gvec.y() * inv_scale;
        grad[ng + 2] = -1.0;
      }
      if (hess) {
        hess[(dim - 3) * dim + (dim - 3)] = hdiag * inv_scale;
        hess[(dim - 2) * dim + (dim - 2)] = hdiag * inv_scale;
      }
      return value * inv_scale - x[ng + 2];
    };
    b.out.program.constraints.push_back(std::move(c));
  }

  // 0 <= s and s <= D_lb per slack.
  for (const auto& [key, sv] : slack_of) {
    const auto [k, m, n] = key;
    const Eigen::Vector2d qr = exp.q_ref.slot_position(m, n);
    const Eigen::Vector2d w = s.device(k).position;
    const Eigen::Vector2d a = qr - w;
    const double sr = a.squaredNorm();
    const double inv = 1.0 / (h2 + sr);
    {
      Constraint lo;
      lo.vars = {sv};
      lo.eval = [inv](const double* x, double* grad, double* hess) {
        if (grad) grad[0] = -inv;
        if (hess) hess[0] = 0.0;
        return -x[0] * inv;
      };
      b.out.program.constraints.push_back(std::move(lo));
    }
    {
      Constraint up;
      up.vars = {sv, qvar(m, n, 0, N), qvar(m, n, 1, N)};
      up.eval = [a, qr, sr, inv](const double* x, double* grad, double* hess) {
        const double dlb =
            sr + 2.0 * (a.x() * (x[1] - qr.x()) + a.y() * (x[2] - qr.y()));
        if (grad) {
          grad[0] = inv;
          grad[1] = -2.0 * a.x() * inv;
          grad[2] = -2.0 * a.y() * inv;
        }
        if (hess)
          for (int i = 0; i < 9; ++i) hess[i] = 0.0;
        return (x[0] - dlb) * inv;
      };
      b.out.program.constraints.push_back(std::move(up));
    }
  }

  b.add_speed_constraints();
  b.add_collision_constraints();
  return std::move(b.out);
}

double trajectory_gamma(const Scenario& s, const Assignment& a,
                        const PowerPlan& power, const Normalizers& eta,
                        const TrajectorySet& q) {
  const ChannelGains g = gains(s, q);
  return eta_gamma(s, a, power, eta, g);
}

bool repair_min_separation(TrajectorySet& q, double dmin) {
  if (q.M < 2 || dmin <= 0.0) return true;
  for (int n = 0; n < q.N; ++n)
    for (int pass = 0; pass < 8; ++pass) {
      bool moved = false;
      for (int m = 0; m < q.M; ++m)
        for (int i = m + 1; i < q.M; ++i) {
          Eigen::Vector2d d = q.waypoints[m].col(n) - q.waypoints[i].col(n);
          const double dist = d.norm();
          if (dist >= dmin) continue;
          if (dist < 1e-12) return false;  // coincident, no push direction
          const double shift = 0.5 * (dmin - dist) * (1.0 + 1e-9) / dist;
          q.waypoints[m].col(n) += shift * d;
          q.waypoints[i].col(n) -= shift * d;
          moved = true;
        }
      if (!moved) break;
    }
  for (int n = 0; n < q.N; ++n)
    for (int m = 0; m < q.M; ++m)
      for (int i = m + 1; i < q.M; ++i)
        if ((q.waypoints[m].col(n) - q.waypoints[i].col(n)).norm() < dmin * (1.0 - 1e-9))
          return false;
  return true;
}

namespace {

void check_preconditions(const Scenario& s, const TrajectorySet& q) {
  const double limit = s.phys.vmax * s.phys.delta * (1.0 + 1e-9) + 1e-9;
  for (int m = 0; m < q.M; ++m)
    for (int n = 0; n < q.N; ++n) {
      const int prev = (n + q.N - 1) % q.N;
      if ((q.waypoints[m].col(n) - q.waypoints[m].col(prev)).norm() > limit)
        throw std::invalid_argument("initial trajectory violates the speed limit");
    }
  for (int n = 0; n < q.N; ++n)
    for (int m = 0; m < q.M; ++m)
      for (int i = m + 1; i < q.M; ++i)
        if ((q.waypoints[m].col(n) - q.waypoints[i].col(n)).norm() <
            s.phys.dmin * (1.0 - 1e-9))
          throw std::invalid_argument("initial trajectory violates minimum separation");
}

Eigen::VectorXd flatten(const TrajectorySet& q, int extra) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * q.M * q.N + extra);
  for (int m = 0; m < q.M; ++m)
    for (int n = 0; n < q.N; ++n) {
      x[qvar(m, n, 0, q.N)] = q.waypoints[m](0, n);
      x[qvar(m, n, 1, q.N)] = q.waypoints[m](1, n);
    }
  return x;
}

}  // namespace

ScaResult sca_iterate(const Scenario& s, const Assignment& a,
                      const PowerPlan& power, const Normalizers& eta,
                      const TrajectorySet& q_init, const ScaOptions& opts) {
  ScaResult res;
  res.q = q_init;
  if (!repair_min_separation(res.q, s.phys.dmin))
    throw std::invalid_argument("initial trajectory separation cannot be repaired");
  check_preconditions(s, res.q);

  res.gamma = trajectory_gamma(s, a, power, eta, res.q);
  res.gamma_trace.push_back(res.gamma);

  for (int it = 0; it < opts.max_iters; ++it) {
    const auto exp = make_expansion(s, a, power, eta, res.q);
    auto tp = build_sca_program(s, exp);

    SolveOptions so = opts.convex;
    so.x0 = flatten(res.q, 1);
    // Strict initial Gamma: just above the surrogate ratios at the expansion
    // point, where surrogate and true values coincide.
    so.x0[tp.gamma_var] = 2.0 * res.gamma + 1e-9;
    const SolveReport rep = solve(tp.program, so);
    res.last_status = rep.status;
    if (rep.status == SolveStatus::infeasible) break;

    TrajectorySet q_new(res.q.M, res.q.N);
    for (int m = 0; m < res.q.M; ++m)
      for (int n = 0; n < res.q.N; ++n)
        q_new.waypoints[m].col(n) = Eigen::Vector2d(rep.x[qvar(m, n, 0, res.q.N)],
                                                    rep.x[qvar(m, n, 1, res.q.N)]);
    const double g_new = trajectory_gamma(s, a, power, eta, q_new);
    ++res.iterations;
    if (g_new > res.gamma + 1e-12) break;  // surrogate step failed to improve

    const double drop = res.gamma - g_new;
    res.q = std::move(q_new);
    res.gamma = g_new;
    res.gamma_trace.push_back(g_new);
    if (drop <= opts.rel_tol * std::max(res.gamma, 1e-12)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace aircomp
