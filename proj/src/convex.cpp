// SPDX-License-Identifier: Apache-2.0
#include "aircomp/convex.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace aircomp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Evaluation buffers shared by all Newton iterations of one solve. Constraint
/// values/gradients/Hessians are written into per-constraint arena slots in
/// parallel and reduced serially in index order, so results do not depend on
/// the thread count.
struct Workspace {
  const ConvexProgram* prog = nullptr;
  std::vector<int> goff, hoff;  // arena offsets per constraint
  Eigen::VectorXd values;
  Eigen::VectorXd grad_arena;
  Eigen::VectorXd hess_arena;
  int max_support = 0;

  explicit Workspace(const ConvexProgram& p) : prog(&p) {
    const int m = static_cast<int>(p.constraints.size());
    goff.resize(m + 1, 0);
    hoff.resize(m + 1, 0);
    for (int i = 0; i < m; ++i) {
      const int s = static_cast<int>(p.constraints[i].vars.size());
      goff[i + 1] = goff[i] + s;
      hoff[i + 1] = hoff[i] + s * s;
      max_support = std::max(max_support, s);
    }
    values.resize(m);
    grad_arena.resize(goff[m]);
    hess_arena.resize(hoff[m]);
  }

  /// Values only (line search).
  void eval_values(const Eigen::VectorXd& x) {
    const auto& cons = prog->constraints;
    const int m = static_cast<int>(cons.size());
    const int cap = max_support;
#pragma omp parallel
    {
      std::vector<double> xloc(cap);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) {
        const auto& c = cons[i];
        for (std::size_t j = 0; j < c.vars.size(); ++j) xloc[j] = x[c.vars[j]];
        values[i] = c.eval(xloc.data(), nullptr, nullptr);
      }
    }
  }

  /// Values, gradients, Hessians.
  void eval_full(const Eigen::VectorXd& x) {
    const auto& cons = prog->constraints;
    const int m = static_cast<int>(cons.size());
    const int cap = max_support;
#pragma omp parallel
    {
      std::vector<double> xloc(cap);
#pragma omp for schedule(static)
      for (int i = 0; i < m; ++i) {
        const auto& c = cons[i];
        for (std::size_t j = 0; j < c.vars.size(); ++j) xloc[j] = x[c.vars[j]];
        values[i] =
            c.eval(xloc.data(), grad_arena.data() + goff[i], hess_arena.data() + hoff[i]);
      }
    }
  }

  double max_value() const { return values.size() ? values.maxCoeff() : -kInf; }
};

bool box_interior(const ConvexProgram& p, const Eigen::VectorXd& x) {
  if (p.lower.size())
    for (int i = 0; i < p.dim; ++i)
      if (x[i] <= p.lower[i]) return false;
  if (p.upper.size())
    for (int i = 0; i < p.dim; ++i)
      if (x[i] >= p.upper[i]) return false;
  return true;
}

int count_finite_bounds(const ConvexProgram& p) {
  int m = 0;
  if (p.lower.size())
    for (int i = 0; i < p.dim; ++i) m += std::isfinite(p.lower[i]) ? 1 : 0;
  if (p.upper.size())
    for (int i = 0; i < p.dim; ++i) m += std::isfinite(p.upper[i]) ? 1 : 0;
  return m;
}

/// Barrier value at already-evaluated constraint values; +inf outside domain.
double barrier_of(const Workspace& ws, const ConvexProgram& p,
                  const Eigen::VectorXd& x, double t) {
  double phi = t * p.cost.dot(x);
  for (int i = 0; i < ws.values.size(); ++i) {
    const double g = ws.values[i];
    if (!(g < 0.0) || !std::isfinite(g)) return kInf;
    phi -= std::log(-g);
  }
  if (p.lower.size())
    for (int i = 0; i < p.dim; ++i)
      if (std::isfinite(p.lower[i])) {
        const double d = x[i] - p.lower[i];
        if (!(d > 0.0)) return kInf;
        phi -= std::log(d);
      }
  if (p.upper.size())
    for (int i = 0; i < p.dim; ++i)
      if (std::isfinite(p.upper[i])) {
        const double d = p.upper[i] - x[i];
        if (!(d > 0.0)) return kInf;
        phi -= std::log(d);
      }
  return phi;
}

struct CenterResult {
  int newton_iters = 0;
  bool converged = false;
};

/// Damped Newton minimization of the log-barrier at fixed t. x must be
/// strictly feasible on entry and stays so.
CenterResult center(const ConvexProgram& p, Workspace& ws, double t,
                    Eigen::VectorXd& x, const SolveOptions& opts) {
  const int n = p.dim;
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd grad(n), step(n), xtrial(n);
  CenterResult res;

  for (int it = 0; it < opts.max_newton; ++it) {
    ws.eval_full(x);
    grad = t * p.cost;
    H.setZero();
    for (std::size_t ci = 0; ci < p.constraints.size(); ++ci) {
      const auto& c = p.constraints[ci];
      const double g = ws.values[static_cast<int>(ci)];
      const int s = static_cast<int>(c.vars.size());
      const double* gl = ws.grad_arena.data() + ws.goff[ci];
      const double* hl = ws.hess_arena.data() + ws.hoff[ci];
      const double w1 = -1.0 / g;        // > 0
      const double w2 = 1.0 / (g * g);
      for (int a = 0; a < s; ++a) {
        const int va = c.vars[a];
        grad[va] += w1 * gl[a];
        for (int b = 0; b < s; ++b)
          H(va, c.vars[b]) += w2 * gl[a] * gl[b] + w1 * hl[a * s + b];
      }
    }
    if (p.lower.size())
      for (int i = 0; i < n; ++i)
        if (std::isfinite(p.lower[i])) {
          const double d = x[i] - p.lower[i];
          grad[i] -= 1.0 / d;
          H(i, i) += 1.0 / (d * d);
        }
    if (p.upper.size())
      for (int i = 0; i < n; ++i)
        if (std::isfinite(p.upper[i])) {
          const double d = p.upper[i] - x[i];
          grad[i] += 1.0 / d;
          H(i, i) += 1.0 / (d * d);
        }

    // Newton step with a diagonal-relative ridge for Hessians made
    // semidefinite by rounding; rows can span many orders of magnitude near
    // convergence, so the damping scales per row.
    const Eigen::VectorXd diag0 = H.diagonal();
    double ridge = 0.0;
    for (;;) {
      Eigen::LLT<Eigen::MatrixXd> llt(H);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(-grad);
        break;
      }
      ridge = (ridge == 0.0) ? 1e-13 : ridge * 100.0;
      if (ridge > 1e-1) throw std::runtime_error("barrier Hessian factorization failed");
      H.diagonal() = diag0 * (1.0 + ridge) +
                     Eigen::VectorXd::Constant(n, ridge * (1.0 + diag0.cwiseAbs().mean()) * 1e-6);
    }

    const double decrement2 = -grad.dot(step);
    if (decrement2 * 0.5 <= opts.newton_tol) {
      res.converged = true;
      return res;
    }

    const double phi0 = barrier_of(ws, p, x, t);
    const double slope = grad.dot(step);
    double stepsize = 1.0;
    bool accepted = false;
    // A phase-1 start can sit tens of orders of magnitude from the optimum,
    // so the backtracking loop must be able to span that range.
    for (int ls = 0; ls < 250 && stepsize > 1e-300; ++ls) {
      xtrial = x + stepsize * step;
      if (box_interior(p, xtrial)) {
        ws.eval_values(xtrial);
        const double phi = barrier_of(ws, p, xtrial, t);
        if (std::isfinite(phi) && phi <= phi0 + opts.alpha * stepsize * slope) {
          accepted = true;
          break;
        }
      }
      stepsize *= opts.beta;
    }
    ++res.newton_iters;
    if (!accepted) {
      res.converged = true;  // numerically at the floor of this centering
      return res;
    }
    x = xtrial;
  }
  return res;
}

/// Max constraint value at x (box violations included), for reports.
double max_violation_at(const ConvexProgram& p, Workspace& ws,
                        const Eigen::VectorXd& x) {
  ws.eval_values(x);
  double v = ws.values.size() ? ws.max_value() : -kInf;
  if (p.lower.size())
    for (int i = 0; i < p.dim; ++i)
      if (std::isfinite(p.lower[i])) v = std::max(v, p.lower[i] - x[i]);
  if (p.upper.size())
    for (int i = 0; i < p.dim; ++i)
      if (std::isfinite(p.upper[i])) v = std::max(v, x[i] - p.upper[i]);
  return v;
}

bool strictly_feasible(const ConvexProgram& p, Workspace& ws,
                       const Eigen::VectorXd& x, double margin) {
  if (!box_interior(p, x)) return false;
  ws.eval_values(x);
  for (int i = 0; i < ws.values.size(); ++i)
    if (!(ws.values[i] < -margin) || !std::isfinite(ws.values[i])) return false;
  return true;
}

Eigen::VectorXd initial_guess(const ConvexProgram& p, const SolveOptions& opts) {
  Eigen::VectorXd x = opts.x0.size() ? opts.x0 : Eigen::VectorXd::Zero(p.dim);
  if (x.size() != p.dim) throw std::invalid_argument("x0 dimension mismatch");
  // Pull the guess strictly inside any finite box.
  for (int i = 0; i < p.dim; ++i) {
    const double lo = p.lower.size() ? p.lower[i] : -kInf;
    const double hi = p.upper.size() ? p.upper[i] : kInf;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      if (x[i] <= lo || x[i] >= hi) x[i] = 0.5 * (lo + hi);
    } else if (std::isfinite(lo) && x[i] <= lo) {
      x[i] = lo + 1.0;
    } else if (std::isfinite(hi) && x[i] >= hi) {
      x[i] = hi - 1.0;
    }
  }
  return x;
}

}  // namespace

Phase1Result phase1(const ConvexProgram& prog, const SolveOptions& opts) {
  // Auxiliary program over (x, s): minimize s subject to g_i(x) - s <= 0.
  ConvexProgram aux;
  aux.dim = prog.dim + 1;
  aux.cost = Eigen::VectorXd::Zero(aux.dim);
  aux.cost[prog.dim] = 1.0;
  if (prog.lower.size()) {
    aux.lower = Eigen::VectorXd::Constant(aux.dim, -kInf);
    aux.lower.head(prog.dim) = prog.lower;
  }
  if (prog.upper.size()) {
    aux.upper = Eigen::VectorXd::Constant(aux.dim, kInf);
    aux.upper.head(prog.dim) = prog.upper;
  }
  const int sidx = prog.dim;
  for (const auto& c : prog.constraints) {
    Constraint shifted;
    shifted.vars = c.vars;
    shifted.vars.push_back(sidx);
    const auto inner = c.eval;
    const int s = static_cast<int>(c.vars.size());
    // g(x) - s <= 0; the inner Hessian block is re-spread into the
    // (s+1) x (s+1) local layout.
    shifted.eval = [inner, s, hloc = std::vector<double>(std::size_t(s) * s)](
                       const double* x, double* grad, double* hess) mutable {
      const double g = inner(x, grad, hess ? hloc.data() : nullptr) - x[s];
      if (grad) grad[s] = -1.0;
      if (hess) {
        for (int a = 0; a < s; ++a)
          for (int b = 0; b < s; ++b) hess[a * (s + 1) + b] = hloc[a * s + b];
        for (int a = 0; a <= s; ++a) {
          hess[a * (s + 1) + s] = 0.0;
          hess[s * (s + 1) + a] = 0.0;
        }
      }
      return g;
    };
    aux.constraints.push_back(std::move(shifted));
  }

  Workspace ws(prog);
  Eigen::VectorXd x = initial_guess(prog, opts);
  ws.eval_values(x);
  double maxg = ws.max_value();
  if (!std::isfinite(maxg))
    throw std::invalid_argument("phase-1 initial point outside constraint domain");

  Eigen::VectorXd z(aux.dim);
  z.head(prog.dim) = x;
  z[sidx] = maxg + std::max(1.0, 0.5 * std::abs(maxg));

  Workspace aws(aux);
  double t = opts.t0;
  const int m = static_cast<int>(aux.constraints.size()) + count_finite_bounds(aux);
  Phase1Result res;
  for (int stage = 0; stage < opts.max_stages; ++stage) {
    center(aux, aws, t, z, opts);
    ws.eval_values(z.head(prog.dim));
    maxg = ws.max_value();
    if (maxg < -opts.phase1_margin && box_interior(prog, z.head(prog.dim))) {
      res.feasible = true;
      res.x = z.head(prog.dim);
      res.infeasibility = maxg;
      return res;
    }
    if (double(m) / t <= opts.gap_tol) break;
    t *= opts.mu;
  }
  res.feasible = maxg < 0.0 && box_interior(prog, z.head(prog.dim));
  res.x = z.head(prog.dim);
  res.infeasibility = res.feasible ? maxg : z[sidx];
  return res;
}

SolveReport solve(const ConvexProgram& prog, const SolveOptions& opts) {
  if (prog.cost.size() != prog.dim)
    throw std::invalid_argument("cost dimension mismatch");
  Workspace ws(prog);
  SolveReport report;
  Eigen::VectorXd x = initial_guess(prog, opts);
  if (!strictly_feasible(prog, ws, x, 0.0)) {
    SolveOptions p1 = opts;
    p1.x0 = x;
    const Phase1Result p1res = phase1(prog, p1);
    if (!p1res.feasible) {
      report.status = SolveStatus::infeasible;
      report.x = p1res.x;
      report.max_violation = p1res.infeasibility;
      report.objective = prog.cost.dot(p1res.x);
      return report;
    }
    x = p1res.x;
  }

  const int m = static_cast<int>(prog.constraints.size()) + count_finite_bounds(prog);
  double t = opts.t0;
  bool hit_limit = false;
  for (;;) {
    const CenterResult cr = center(prog, ws, t, x, opts);
    report.newton_iters += cr.newton_iters;
    ++report.barrier_stages;
    report.objective_trace.push_back(prog.cost.dot(x));
    const double gap = double(m) / t;
    if (gap <= opts.gap_tol * std::max(1.0, std::abs(prog.cost.dot(x)))) break;
    if (report.barrier_stages >= opts.max_stages) {
      hit_limit = true;
      break;
    }
    t *= opts.mu;
  }

  report.x = x;
  report.objective = prog.cost.dot(x);
  report.max_violation = max_violation_at(prog, ws, x);
  report.status = hit_limit ? SolveStatus::iteration_limit
                            : (report.max_violation <= opts.feas_tol
                                   ? SolveStatus::optimal
                                   : SolveStatus::iteration_limit);
  return report;
}

}  // namespace aircomp
