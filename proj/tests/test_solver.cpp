// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aircomp/normalizing.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/solver.hpp"
#include "aircomp/verifier.hpp"

using namespace aircomp;

namespace {

/// Small two-cluster scenario that solves in well under a second per probe.
Scenario tiny_scenario(std::uint64_t seed, int uavs = 1) {
  Rng rng(seed);
  Scenario s;
  s.phys = PhysParams{};
  s.phys.duration = 6.0;  // 12 slots
  s.num_uavs = uavs;
  const Eigen::Vector2d centers[2] = {{80.0, 0.0}, {-80.0, 60.0}};
  for (int l = 0; l < 2; ++l) {
    Cluster c;
    c.id = l + 1;
    c.epsilon = 0.05;
    for (int k = 0; k < 3; ++k)
      c.devices.push_back(
          {centers[l] + Eigen::Vector2d(rng.uniform(-30, 30), rng.uniform(-30, 30)),
           0.8});
    s.clusters.push_back(c);
  }
  return s;
}

}  // namespace

TEST_CASE("upper bound task counts") {
  CHECK(upper_bound_tasks(generate_paper_scenario(150.0, 1, 0.8, 1)) == 50);
  CHECK(upper_bound_tasks(generate_paper_scenario(80.0, 2, 0.8, 1)) == 53);
  CHECK(upper_bound_tasks(generate_paper_scenario(160.0, 1, 0.8, 1)) == 53);
}

TEST_CASE("bisection against a linear synthetic profile") {
  int probes = 0;
  const int d_star = bisect_max_feasible(20, [&](int d) {
    ++probes;
    return d / 10.0 <= 1.0;  // Gamma(D) = D/10 against a threshold of one
  });
  CHECK(d_star == 10);
  CHECK(probes <= 5);
}

TEST_CASE("bisection against randomized monotone step profiles") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int d_ub = 1 + int(rng.uniform() * 60.0);
    const int threshold = int(rng.uniform() * (d_ub + 1));  // 0..d_ub
    int probes = 0;
    const int got = bisect_max_feasible(d_ub, [&](int d) {
      ++probes;
      return d <= threshold;
    });
    CHECK(got == threshold);
    CHECK(probes <= 2 + int(std::ceil(std::log2(double(d_ub)))));
  }
}

TEST_CASE("initial state splits budgets exactly across scheduled slots") {
  const Scenario s = tiny_scenario(1);
  const int d = 4;
  const BcdState st = init_state(s, d);
  for (int l = 0; l < s.num_clusters(); ++l) CHECK(st.assignment.task_count(l) == d);
  for (int k = 0; k < s.num_devices(); ++k)
    CHECK(st.power.spent(k) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("circular initialization respects the speed limit") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Scenario s = generate_paper_scenario(30.0, 2, 0.8, seed);
    const BcdState st = init_state(s, 5);
    const double limit = s.phys.vmax * s.phys.delta + 1e-9;
    for (int m = 0; m < s.num_uavs; ++m)
      for (int n = 0; n < s.num_slots(); ++n) {
        const int prev = (n + s.num_slots() - 1) % s.num_slots();
        CHECK((st.trajectory.waypoints[m].col(n) -
               st.trajectory.waypoints[m].col(prev))
                  .norm() <= limit);
      }
  }
}

TEST_CASE("initial normalizers equal the closed form on the initial state") {
  const Scenario s = tiny_scenario(2);
  const BcdState st = init_state(s, 3);
  const Normalizers direct =
      optimal_eta(s, st.assignment, st.power, gains(s, st.trajectory));
  CHECK(st.eta.eta == direct.eta);
}

TEST_CASE("bcd trace is non-increasing and reproducible") {
  const Scenario s = tiny_scenario(3);
  SolverOptions opts;
  opts.sca.max_iters = 6;
  const BcdResult a = bcd_solve(s, 3, opts);
  const BcdResult b = bcd_solve(s, 3, opts);
  REQUIRE(a.state.gamma_history.size() >= 2);
  for (std::size_t i = 1; i < a.state.gamma_history.size(); ++i)
    CHECK(a.state.gamma_history[i] <= a.state.gamma_history[i - 1] + 1e-9);
  CHECK(a.gamma == b.gamma);  // bit-identical reruns
  CHECK(a.state.gamma_history == b.state.gamma_history);
  CHECK(a.state.power.p == b.state.power.p);
}

TEST_CASE("single-device smoke instance is comfortably feasible") {
  Scenario s;
  s.phys = PhysParams{};
  s.phys.duration = 4.0;
  s.num_uavs = 1;
  Cluster c;
  c.id = 1;
  c.epsilon = 0.2;
  c.devices.push_back({Eigen::Vector2d(20.0, -10.0), 2.0});
  s.clusters.push_back(c);
  SolverOptions opts;
  opts.sca.max_iters = 6;
  const BcdResult res = bcd_solve(s, 2, opts);
  CHECK(res.gamma < 0.5);
  CHECK(res.counts_met);
}

TEST_CASE("bisection returns a verified feasible outcome") {
  const Scenario s = tiny_scenario(4);
  SolverOptions opts;
  opts.sca.max_iters = 6;
  const SolveOutcome out = bisection_solve(s, opts);
  REQUIRE(out.d_star >= 1);
  CHECK(out.d_star <= out.upper_bound_tasks);
  bool saw_accept = false;
  for (const auto& p : out.probes) {
    if (p.accepted) {
      CHECK(p.gamma <= 1.0 + 1e-9);
      saw_accept = true;
    }
  }
  CHECK(saw_accept);
  VerifyOptions vo;
  vo.required_task_count = out.d_star;
  const auto problems = verify_state(s, out.state.assignment, out.state.power,
                                     out.state.eta, out.state.trajectory, vo);
  for (const auto& p : problems) MESSAGE(p);
  CHECK(problems.empty());
}

TEST_CASE("impossible targets yield a zero-task diagnostic") {
  Scenario s = tiny_scenario(5);
  for (auto& c : s.clusters) c.epsilon = 1e-7;  // unreachable accuracy
  SolverOptions opts;
  opts.sca.max_iters = 4;
  const SolveOutcome out = bisection_solve(s, opts);
  CHECK(out.d_star == 0);
  CHECK_FALSE(out.error.empty());
}

TEST_CASE("gamma profile is non-decreasing and deterministic") {
  const Scenario s = tiny_scenario(6);
  SolverOptions opts;
  opts.sca.max_iters = 5;
  const auto profile = gamma_profile(s, {1, 2, 3}, opts);
  REQUIRE(profile.size() == 3);
  for (std::size_t i = 1; i < profile.size(); ++i)
    CHECK(profile[i].second >= profile[i - 1].second - 1e-3);
  const auto again = gamma_profile(s, {2}, opts);
  CHECK(again[0].second == profile[1].second);
  CHECK(gamma_profile(s, {}, opts).empty());
}

TEST_CASE("carried trajectories keep probe traces monotone") {
  const Scenario s = tiny_scenario(7);
  SolverOptions opts;
  opts.sca.max_iters = 5;
  opts.carry_trajectory = true;
  const SolveOutcome out = bisection_solve(s, opts);
  REQUIRE(out.d_star >= 1);
  for (const auto& p : out.probes)
    for (std::size_t i = 1; i < p.gamma_history.size(); ++i)
      CHECK(p.gamma_history[i] <= p.gamma_history[i - 1] + 1e-9);
}
