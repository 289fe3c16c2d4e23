// SPDX-License-Identifier: Apache-2.0
//
// Dense convex solver for the power and trajectory subproblems: linear
// objective, smooth convex inequality constraints with sparse variable
// support, optional box bounds. Phase-1 feasibility search plus log-barrier
// path following with damped Newton steps and backtracking line search.
#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <vector>

namespace aircomp {

/// One smooth convex constraint g(x) <= 0 touching only `vars`. The callback
/// receives the local values (in `vars` order) and fills the local gradient
/// and row-major local Hessian when the pointers are non-null. Out-of-domain
/// points must return +infinity.
struct Constraint {
  std::vector<int> vars;
  std::function<double(const double* x, double* grad, double* hess)> eval;
};

struct ConvexProgram {
  int dim = 0;
  Eigen::VectorXd cost;  ///< linear objective, minimized
  std::vector<Constraint> constraints;
  Eigen::VectorXd lower;  ///< box bounds; empty vectors mean unbounded
  Eigen::VectorXd upper;
};

enum class SolveStatus { optimal, infeasible, iteration_limit };

struct SolveReport {
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
  double max_violation = std::numeric_limits<double>::infinity();
  int barrier_stages = 0;
  int newton_iters = 0;
  std::vector<double> objective_trace;  ///< objective after each centering
  SolveStatus status = SolveStatus::iteration_limit;
};

struct SolveOptions {
  double t0 = 1.0;
  double mu = 10.0;
  double newton_tol = 1e-10;  ///< half squared Newton decrement
  double alpha = 0.25;
  double beta = 0.5;
  double gap_tol = 1e-8;   ///< stop when m / t falls below
  double feas_tol = 1e-9;
  int max_newton = 80;     ///< per centering stage
  int max_stages = 60;
  double phase1_margin = 1e-7;  ///< phase-1 stops once max_i g_i < -margin
  Eigen::VectorXd x0;           ///< optional warm start, need not be feasible
};

struct Phase1Result {
  bool feasible = false;
  Eigen::VectorXd x;
  double infeasibility = std::numeric_limits<double>::infinity();
};

/// Strictly feasible point, or the minimized maximum constraint value when the
/// program is infeasible.
Phase1Result phase1(const ConvexProgram& prog, const SolveOptions& opts = {});

/// Full solve. Runs phase-1 automatically unless opts.x0 is already strictly
/// feasible. On optimal exit the duality gap is below
/// gap_tol * max(1, |objective|) and every constraint holds to feas_tol.
SolveReport solve(const ConvexProgram& prog, const SolveOptions& opts = {});

}  // namespace aircomp
