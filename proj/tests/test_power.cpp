// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aircomp/normalizing.hpp"
#include "aircomp/power.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/solver.hpp"

using namespace aircomp;

namespace {

/// One device, one slot, one active triple with direct coefficients.
PowerSubproblemCoeffs single_coeffs(double theta, double phi, double budget,
                                    double mse_scale) {
  PowerSubproblemCoeffs c;
  c.K = 1;
  c.N = 1;
  c.budgets = {budget};
  c.scheduled = {1};
  PowerActiveTriple t;
  t.l = t.m = t.n = 0;
  t.noise_term = phi;
  t.mse_scale = mse_scale;
  t.cluster_devices = {0};
  t.theta_cluster = {theta};
  c.triples.push_back(std::move(t));
  return c;
}

double solve_coeffs_gamma(const PowerSubproblemCoeffs& c, Eigen::VectorXd* u = nullptr) {
  const PowerProgram pp = build_power_program(c);
  SolveOptions opts;
  opts.gap_tol = 1e-10;
  opts.x0 = Eigen::VectorXd::Zero(pp.program.dim);
  opts.x0[pp.gamma_var] = 10.0;
  const SolveReport rep = solve(pp.program, opts);
  REQUIRE(rep.status == SolveStatus::optimal);
  if (u) *u = rep.x.head(pp.gamma_var);
  return rep.x[pp.gamma_var];
}

}  // namespace

TEST_CASE("ample budget reaches perfect alignment") {
  // theta = 1, phi = 0, budget 4: u* = 1, Gamma* = 0.
  Eigen::VectorXd u;
  const double gamma = solve_coeffs_gamma(single_coeffs(1.0, 0.0, 4.0, 1.0), &u);
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(gamma == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("tight budget binds and leaves misalignment") {
  // theta = 1, phi = 0, budget 0.25: u* = 0.5, scaled misalignment 0.25.
  Eigen::VectorXd u;
  const double gamma = solve_coeffs_gamma(single_coeffs(1.0, 0.0, 0.25, 1.0), &u);
  CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(gamma == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("constraint scaling divides through") {
  const double gamma = solve_coeffs_gamma(single_coeffs(1.0, 0.0, 0.25, 8.0));
  CHECK(gamma == doctest::Approx(0.25 / 8.0).epsilon(1e-5));
}

namespace {

struct RandomInstance {
  Scenario s;
  Assignment a;
  Normalizers eta;
  ChannelGains g;
  TrajectorySet q;

  explicit RandomInstance(std::uint64_t seed) {
    Rng rng(seed);
    const int L = 1 + int(rng.uniform() * 3.0);  // up to 3 clusters
    const int N = 1 + int(rng.uniform() * 3.0);  // up to 3 slots
    const int M = 1 + int(rng.uniform() * std::min(2.0, double(L)));
    s.phys = PhysParams{};
    s.phys.duration = s.phys.delta * N;
    s.num_uavs = M;
    for (int l = 0; l < L; ++l) {
      Cluster c;
      c.id = l + 1;
      c.epsilon = rng.uniform(0.01, 0.1);
      const Eigen::Vector2d center(rng.uniform(-300, 300), rng.uniform(-300, 300));
      const int devs = 1 + int(rng.uniform() * 3.0);  // up to 3 devices
      for (int k = 0; k < devs; ++k)
        c.devices.push_back(
            {center + Eigen::Vector2d(rng.uniform(-50, 50), rng.uniform(-50, 50)),
             rng.uniform(0.2, 1.0)});
      s.clusters.push_back(c);
    }
    q = TrajectorySet(M, N);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n)
        q.waypoints[m].col(n) =
            Eigen::Vector2d(rng.uniform(-300, 300), rng.uniform(-300, 300));
    a = Assignment(L, M, N);
    for (int n = 0; n < N; ++n) {
      // Random partial matching of UAVs to clusters at each slot.
      std::vector<int> perm(L);
      for (int l = 0; l < L; ++l) perm[l] = l;
      for (int l = L - 1; l > 0; --l)
        std::swap(perm[l], perm[int(rng.uniform() * (l + 1))]);
      for (int m = 0; m < M && m < L; ++m)
        if (rng.uniform() < 0.8) a.set(perm[m], m, n, true);
    }
    g = gains(s, q);
    PowerPlan warm(s.num_devices(), N);
    for (int k = 0; k < warm.K; ++k)
      for (int n = 0; n < N; ++n) warm.at(k, n) = rng.uniform(0.01, 0.1);
    eta = optimal_eta(s, a, warm, g);
  }
};

/// Projected subgradient on min over u of the max scaled MSE ratio, with
/// per-device ball projection. Independent oracle for the QCQP route.
double projected_subgradient_gamma(const Scenario& s, const Assignment& a,
                                   const Normalizers& eta, const ChannelGains& g,
                                   int iters) {
  const auto coeffs = build_power_coeffs(s, a, eta, g);
  const PowerProgram pp = build_power_program(coeffs);
  const int nu = pp.gamma_var;
  if (nu == 0) return 0.0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nu);

  auto project = [&] {
    for (int k = 0; k < coeffs.K; ++k) {
      double norm2 = 0.0;
      for (int n = 0; n < coeffs.N; ++n) {
        const int v = pp.var_of[k * coeffs.N + n];
        if (v >= 0) norm2 += u[v] * u[v];
      }
      if (norm2 > coeffs.budgets[k]) {
        const double scale = std::sqrt(coeffs.budgets[k] / norm2);
        for (int n = 0; n < coeffs.N; ++n) {
          const int v = pp.var_of[k * coeffs.N + n];
          if (v >= 0) u[v] *= scale;
        }
      }
    }
  };
  auto ratio_and_grad = [&](Eigen::VectorXd* grad) {
    double worst = -1e300;
    int worst_i = -1;
    std::vector<double> xloc;
    for (std::size_t i = 0; i < coeffs.triples.size(); ++i) {
      const auto& con = pp.program.constraints[i];
      xloc.resize(con.vars.size());
      for (std::size_t j = 0; j + 1 < con.vars.size(); ++j) xloc[j] = u[con.vars[j]];
      xloc.back() = 0.0;
      const double r = con.eval(xloc.data(), nullptr, nullptr);
      if (r > worst) {
        worst = r;
        worst_i = static_cast<int>(i);
      }
    }
    if (grad) {
      grad->setZero();
      const auto& con = pp.program.constraints[worst_i];
      std::vector<double> gl(con.vars.size()), xl(con.vars.size());
      for (std::size_t j = 0; j + 1 < con.vars.size(); ++j) xl[j] = u[con.vars[j]];
      xl.back() = 0.0;
      con.eval(xl.data(), gl.data(), nullptr);
      for (std::size_t j = 0; j + 1 < con.vars.size(); ++j)
        (*grad)[con.vars[j]] += gl[j];
    }
    return worst;
  };

  double best = 1e300;
  Eigen::VectorXd grad(nu);
  double step = 0.05 * std::sqrt(*std::max_element(coeffs.budgets.begin(),
                                                   coeffs.budgets.end()));
  const int phases = 50;
  for (int ph = 0; ph < phases; ++ph) {
    for (int it = 0; it < iters / phases; ++it) {
      const double f = ratio_and_grad(&grad);
      best = std::min(best, f);
      const double norm = grad.norm();
      if (norm > 0.0) u -= (step / norm) * grad;
      project();
    }
    step *= 0.8;
  }
  best = std::min(best, ratio_and_grad(nullptr));
  return best;
}

}  // namespace

TEST_CASE("solver matches the projected-subgradient oracle on random instances") {
  int done = 0;
  for (std::uint64_t seed = 1; done < 8; ++seed) {
    RandomInstance inst(seed);
    if (build_power_coeffs(inst.s, inst.a, inst.eta, inst.g).triples.empty()) continue;
    const PowerResult pr = solve_power(inst.s, inst.a, inst.eta, inst.g);
    REQUIRE(pr.status == SolveStatus::optimal);
    const double oracle =
        projected_subgradient_gamma(inst.s, inst.a, inst.eta, inst.g, 150'000);
    CHECK(std::abs(pr.gamma - oracle) <= 1e-4 * std::max(1.0, std::abs(oracle)));
    ++done;
  }
}

TEST_CASE("returned plan satisfies budgets and silence invariants") {
  for (std::uint64_t seed : {4, 9, 15}) {
    RandomInstance inst(seed);
    const PowerResult pr = solve_power(inst.s, inst.a, inst.eta, inst.g);
    REQUIRE(pr.status != SolveStatus::infeasible);
    for (int k = 0; k < pr.power.K; ++k) {
      CHECK(pr.power.spent(k) <= inst.s.device(k).power_budget * (1.0 + 1e-9));
      const int l = inst.s.cluster_of_device(k);
      for (int n = 0; n < pr.power.N; ++n) {
        CHECK(pr.power.at(k, n) >= 0.0);
        if (inst.a.uav_of(l, n) < 0) CHECK(pr.power.at(k, n) == 0.0);
      }
    }
  }
}

TEST_CASE("reported gamma equals the recomputed max active ratio") {
  for (std::uint64_t seed : {2, 11}) {
    RandomInstance inst(seed);
    if (build_power_coeffs(inst.s, inst.a, inst.eta, inst.g).triples.empty()) continue;
    const PowerResult pr = solve_power(inst.s, inst.a, inst.eta, inst.g);
    REQUIRE(pr.status == SolveStatus::optimal);
    double recomputed = 0.0;
    for (int l = 0; l < inst.a.L; ++l)
      for (int n = 0; n < inst.a.N; ++n) {
        if (inst.a.uav_of(l, n) < 0) continue;
        const auto mse =
            mse_analytic(inst.s, l, n, inst.a, inst.eta, pr.power, inst.g);
        recomputed = std::max(recomputed, mse.total / inst.s.clusters[l].epsilon);
      }
    CHECK(std::abs(pr.gamma - recomputed) <= 1e-8 * std::max(1.0, recomputed));
  }
}

TEST_CASE("gamma never grows when budgets grow") {
  RandomInstance inst(21);
  double last = 1e300;
  for (double scale : {1.0, 1.5, 2.25, 4.0}) {
    Scenario scaled = inst.s;
    for (auto& c : scaled.clusters)
      for (auto& d : c.devices) d.power_budget *= scale;
    const PowerResult pr = solve_power(scaled, inst.a, inst.eta, inst.g);
    REQUIRE(pr.status == SolveStatus::optimal);
    CHECK(pr.gamma <= last + 1e-7);
    last = pr.gamma;
  }
}

TEST_CASE("phase-1 capacity: a valid BCD state is always strictly feasible") {
  const Scenario s = generate_paper_scenario(10.0, 2, 0.8, 31);
  const BcdState st = init_state(s, 3);
  const ChannelGains g = gains(s, st.trajectory);
  const auto coeffs = build_power_coeffs(s, st.assignment, st.eta, g);
  const PowerProgram pp = build_power_program(coeffs);
  const Phase1Result p1 = phase1(pp.program);
  CHECK(p1.feasible);
}

TEST_CASE("empty schedule yields a zero plan") {
  const Scenario s = generate_paper_scenario(5.0, 1, 0.8, 8);
  Assignment none(s.num_clusters(), 1, s.num_slots());
  Normalizers eta(s.num_clusters(), 1, s.num_slots());
  const TrajectorySet q = init_state(s, 1).trajectory;
  const ChannelGains g = gains(s, q);
  const PowerResult pr = solve_power(s, none, eta, g);
  CHECK(pr.status == SolveStatus::optimal);
  CHECK(pr.gamma == 0.0);
  CHECK(pr.power.p.cwiseAbs().maxCoeff() == 0.0);
}
