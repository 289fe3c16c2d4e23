// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <tuple>

#include "aircomp/normalizing.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/solver.hpp"
#include "aircomp/trajectory.hpp"
#include "aircomp/verifier.hpp"

using namespace aircomp;

namespace {

struct Fixture {
  Scenario s;
  BcdState st;

  explicit Fixture(std::uint64_t seed, int uavs = 1, double duration = 6.0)
      : s(generate_paper_scenario(duration, uavs, 0.8, seed)), st(init_state(s, 2)) {}
};

/// Alignment term recomputed from first principles at an arbitrary UAV
/// position, independent of the expansion caches.
double align_term(const Scenario& s, const PowerPlan& p, double eta, int l, int n,
                  const Eigen::Vector2d& q) {
  const double h2 = s.phys.altitude * s.phys.altitude;
  double f = 0.0;
  const int k0 = s.device_offset(l);
  const int kl = static_cast<int>(s.clusters[l].devices.size());
  for (int k = k0; k < k0 + kl; ++k) {
    if (p.at(k, n) <= 0.0) continue;
    f += 2.0 * eta * std::sqrt(s.phys.beta0 * p.at(k, n)) *
         std::pow(h2 + (q - s.device(k).position).squaredNorm(),
                  -s.phys.gamma / 4.0);
  }
  return f;
}

double cache_f_lb(const ScaTripleCache& t, const Eigen::Vector2d& q) {
  double f = t.f_ref;
  for (std::size_t k = 0; k < t.f_w.size(); ++k)
    f += t.f_slope[k] * ((q - t.f_w[k]).squaredNorm() - t.f_sr[k]);
  return f;
}

}  // namespace

TEST_CASE("first-order bounds hold everywhere and are tight at the expansion") {
  Fixture fx(3, 2);
  const Normalizers eta =
      optimal_eta(fx.s, fx.st.assignment, fx.st.power, gains(fx.s, fx.st.trajectory));
  const ScaExpansionPoint exp =
      make_expansion(fx.s, fx.st.assignment, fx.st.power, eta, fx.st.trajectory);
  REQUIRE(!exp.triples.empty());

  Rng rng(17);
  for (const auto& t : exp.triples) {
    const Eigen::Vector2d qr = exp.q_ref.slot_position(t.m, t.n);
    const double e = eta.at(t.l, t.m, t.n);

    // Equality at the expansion point.
    CHECK(cache_f_lb(t, qr) ==
          doctest::Approx(align_term(fx.s, fx.st.power, e, t.l, t.n, qr))
              .epsilon(1e-10));
    for (std::size_t k = 0; k < t.g_sr.size(); ++k)
      CHECK(t.g_sr[k] ==
            doctest::Approx((qr - fx.s.device(t.g_device[k]).position).squaredNorm())
                .epsilon(1e-12));

    // Lower bounds at random displacements.
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Vector2d q =
          qr + Eigen::Vector2d(rng.uniform(-250, 250), rng.uniform(-250, 250));
      CHECK(cache_f_lb(t, q) <=
            align_term(fx.s, fx.st.power, e, t.l, t.n, q) + 1e-10);
      for (std::size_t k = 0; k < t.g_sr.size(); ++k) {
        const double dlb = t.g_sr[k] + 2.0 * t.g_anchor[k].dot(q - qr);
        const double true_d2 =
            (q - fx.s.device(t.g_device[k]).position).squaredNorm();
        CHECK(dlb <= true_d2 + 1e-9);
      }
    }
  }
}

TEST_CASE("separation lower bound under-estimates the squared distance") {
  Fixture fx(5, 2);
  Rng rng(23);
  const auto& q = fx.st.trajectory;
  for (int n = 0; n < q.N; ++n) {
    const Eigen::Vector2d ra = q.slot_position(0, n), rb = q.slot_position(1, n);
    const Eigen::Vector2d d = ra - rb;
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Vector2d qa =
          ra + Eigen::Vector2d(rng.uniform(-300, 300), rng.uniform(-300, 300));
      const Eigen::Vector2d qb =
          rb + Eigen::Vector2d(rng.uniform(-300, 300), rng.uniform(-300, 300));
      const double dlb = -d.squaredNorm() + 2.0 * d.dot(qa - qb);
      CHECK(dlb <= (qa - qb).squaredNorm() + 1e-9);
    }
    const double at_ref = -d.squaredNorm() + 2.0 * d.dot(ra - rb);
    CHECK(at_ref == doctest::Approx(d.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("sca trace is non-increasing and the result stays feasible") {
  for (std::uint64_t seed : {1, 4}) {
    Fixture fx(seed);
    const ChannelGains g = gains(fx.s, fx.st.trajectory);
    const Normalizers eta = optimal_eta(fx.s, fx.st.assignment, fx.st.power, g);
    ScaOptions opts;
    opts.max_iters = 8;
    const ScaResult res = sca_iterate(fx.s, fx.st.assignment, fx.st.power, eta,
                                      fx.st.trajectory, opts);
    REQUIRE(res.gamma_trace.size() >= 2);
    for (std::size_t i = 1; i < res.gamma_trace.size(); ++i)
      CHECK(res.gamma_trace[i] <= res.gamma_trace[i - 1] + 1e-9);
    CHECK(res.gamma < res.gamma_trace.front());

    VerifyOptions vo;
    vo.mse_rel_tol = 1e300;  // kinematics only here
    const auto problems = verify_state(fx.s, fx.st.assignment, fx.st.power, eta,
                                       res.q, vo);
    CHECK(problems.empty());
  }
}

TEST_CASE("single-cluster instance converges to the grid-search hover point") {
  // One tight cluster, one UAV, every slot active: the optimum is a hover.
  Scenario s;
  s.phys = PhysParams{};
  s.phys.duration = 4.0;  // 8 slots
  s.num_uavs = 1;
  Cluster c;
  c.id = 1;
  c.epsilon = 0.05;
  Rng rng(9);
  for (int k = 0; k < 3; ++k)
    c.devices.push_back({Eigen::Vector2d(100.0 + rng.uniform(-40, 40),
                                         -50.0 + rng.uniform(-40, 40)),
                         0.8});
  s.clusters.push_back(c);
  const int N = s.num_slots();

  Assignment a(1, 1, N);
  for (int n = 0; n < N; ++n) a.set(0, 0, n, true);
  PowerPlan p(3, N);
  for (int k = 0; k < 3; ++k)
    for (int n = 0; n < N; ++n) p.at(k, n) = 0.8 / N;

  // Start hovering far away; the trajectory block alternated with the
  // closed-form normalizer refresh (its context inside the descent loop)
  // must walk roughly 80 m to the cluster's optimal hover point.
  TrajectorySet q0(1, N);
  for (int n = 0; n < N; ++n)
    q0.waypoints[0].col(n) = Eigen::Vector2d(160.0, 10.0);

  TrajectorySet q = q0;
  Normalizers eta = optimal_eta(s, a, p, gains(s, q));
  double gamma = trajectory_gamma(s, a, p, eta, q);
  const double gamma_start = gamma;
  for (int round = 0; round < 25; ++round) {
    ScaOptions opts;
    opts.max_iters = 10;
    const ScaResult res = sca_iterate(s, a, p, eta, q, opts);
    q = res.q;
    eta = optimal_eta(s, a, p, gains(s, q));
    const double next = trajectory_gamma(s, a, p, eta, q);
    CHECK(next <= gamma + 1e-9);
    if (gamma - next <= 1e-9 * gamma) {
      gamma = next;
      break;
    }
    gamma = next;
  }
  CHECK(gamma < gamma_start);

  // Grid of hover candidates, each scored with its own optimal normalizer:
  // the best achievable hover ratio.
  double best_grid = 1e300;
  Eigen::Vector2d best_point = Eigen::Vector2d::Zero();
  for (double x = 40.0; x <= 170.0; x += 2.0)
    for (double y = -110.0; y <= 20.0; y += 2.0) {
      TrajectorySet hover(1, N);
      for (int n = 0; n < N; ++n) hover.waypoints[0].col(n) = Eigen::Vector2d(x, y);
      const Normalizers he = optimal_eta(s, a, p, gains(s, hover));
      const double hg = trajectory_gamma(s, a, p, he, hover);
      if (hg < best_grid) {
        best_grid = hg;
        best_point = Eigen::Vector2d(x, y);
      }
    }
  CHECK(gamma <= best_grid * (1.0 + 1e-3));
  // The limit is a hover: waypoints collapse near the grid optimum.
  for (int n = 0; n < N; ++n)
    CHECK((q.slot_position(0, n) - best_point).norm() <= 4.0);
}

TEST_CASE("coincident UAV starts are rejected after repair fails") {
  Fixture fx(2, 2);
  TrajectorySet q = fx.st.trajectory;
  q.waypoints[1] = q.waypoints[0];  // exact overlap: no push direction
  const Normalizers eta =
      optimal_eta(fx.s, fx.st.assignment, fx.st.power, gains(fx.s, fx.st.trajectory));
  CHECK_THROWS_AS(
      sca_iterate(fx.s, fx.st.assignment, fx.st.power, eta, q, ScaOptions{}),
      std::invalid_argument);
}

TEST_CASE("speed-violating starts are rejected") {
  Fixture fx(2);
  TrajectorySet q = fx.st.trajectory;
  q.waypoints[0].col(3) += Eigen::Vector2d(500.0, 0.0);
  const Normalizers eta =
      optimal_eta(fx.s, fx.st.assignment, fx.st.power, gains(fx.s, fx.st.trajectory));
  CHECK_THROWS_AS(
      sca_iterate(fx.s, fx.st.assignment, fx.st.power, eta, q, ScaOptions{}),
      std::invalid_argument);
}

TEST_CASE("separation repair pushes pairs apart symmetrically") {
  TrajectorySet q(2, 3);
  for (int n = 0; n < 3; ++n) {
    q.waypoints[0].col(n) = Eigen::Vector2d(0.0, 0.0);
    q.waypoints[1].col(n) = Eigen::Vector2d(40.0, 0.0);
  }
  REQUIRE(repair_min_separation(q, 100.0));
  for (int n = 0; n < 3; ++n) {
    CHECK((q.waypoints[0].col(n) - q.waypoints[1].col(n)).norm() >=
          100.0 * (1.0 - 1e-9));
    CHECK(q.waypoints[0](1, n) == 0.0);  // push stays on the connecting line
  }
}

TEST_CASE("explicit-slack and substituted programs agree on the optimum") {
  for (std::uint64_t seed : {1, 2, 3, 6, 8}) {
    Fixture fx(seed, 1, 3.0);
    const ChannelGains g = gains(fx.s, fx.st.trajectory);
    const Normalizers eta = optimal_eta(fx.s, fx.st.assignment, fx.st.power, g);
    const ScaExpansionPoint exp =
        make_expansion(fx.s, fx.st.assignment, fx.st.power, eta, fx.st.trajectory);

    auto sub = build_sca_program(fx.s, exp);
    auto exl = build_sca_program_explicit(fx.s, exp);

    const double gamma0 =
        trajectory_gamma(fx.s, fx.st.assignment, fx.st.power, eta, fx.st.trajectory);
    SolveOptions so;
    so.gap_tol = 1e-10;
    so.x0 = Eigen::VectorXd::Zero(sub.program.dim);
    for (int m = 0; m < fx.st.trajectory.M; ++m)
      for (int n = 0; n < fx.st.trajectory.N; ++n) {
        so.x0[(m * fx.st.trajectory.N + n) * 2] = fx.st.trajectory.waypoints[m](0, n);
        so.x0[(m * fx.st.trajectory.N + n) * 2 + 1] =
            fx.st.trajectory.waypoints[m](1, n);
      }
    so.x0[sub.gamma_var] = 2.0 * gamma0 + 1e-9;
    const SolveReport sub_rep = solve(sub.program, so);
    REQUIRE(sub_rep.status == SolveStatus::optimal);

    // Seed the explicit program at the expansion point with slacks strictly
    // inside (0, D_lb); phase-1 tightens the rest.
    SolveOptions se;
    se.gap_tol = 1e-10;
    se.x0 = Eigen::VectorXd::Zero(exl.program.dim);
    se.x0.head(sub.gamma_var) = so.x0.head(sub.gamma_var);
    {
      // Slack order matches the builder's (device, uav, slot) map ordering.
      std::map<std::tuple<int, int, int>, double> sr;
      for (const auto& t : exp.triples)
        for (std::size_t k = 0; k < t.g_sr.size(); ++k)
          sr[{t.g_device[k], t.m, t.n}] = t.g_sr[k];
      int sv = sub.gamma_var;  // slacks follow the q block
      for (const auto& [key, val] : sr) se.x0[sv++] = 0.5 * val;
    }
    se.x0[exl.gamma_var] = 2.0 * gamma0 + 1.0;
    const SolveReport exl_rep = solve(exl.program, se);
    REQUIRE(exl_rep.status == SolveStatus::optimal);

    CHECK(std::abs(sub_rep.objective - exl_rep.objective) <=
          1e-6 * std::max(1.0, std::abs(exl_rep.objective)));
  }
}
