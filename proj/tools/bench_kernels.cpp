// SPDX-License-Identifier: Apache-2.0
//
// Timing comparison of the OpenMP kernels against their serial references on
// a paper-sized instance. Results must agree bitwise; the table reports
// speedups only.
#include <chrono>
#include <cstdio>

#include <omp.h>

#include "aircomp/kernels.hpp"
#include "aircomp/solver.hpp"

using namespace aircomp;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_of(F&& f, int reps) {
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

void report(const char* name, double serial, double parallel, bool equal) {
  std::printf("%-22s %10.4f ms %10.4f ms %7.2fx  %s\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel, equal ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
  const Scenario s = generate_paper_scenario(160.0, 2, 0.8, 7);
  const int d = upper_bound_tasks(s);
  const BcdState st = init_state(s, d);
  const int K = s.num_devices(), M = s.num_uavs, N = s.num_slots();
  std::printf("instance: K=%d devices, M=%d UAVs, N=%d slots, %d threads\n\n", K, M,
              N, omp_get_max_threads());
  std::printf("%-22s %13s %13s %8s\n", "kernel", "serial", "openmp", "speedup");

  {
    ChannelGains a(K, M, N), b(K, M, N);
    const double ts = time_of([&] { kernels::ref::gains_fill(s, st.trajectory, a); }, 20);
    const double tp = time_of([&] { kernels::gains_fill(s, st.trajectory, b); }, 20);
    report("channel gains", ts, tp, a.mag == b.mag && a.dist2 == b.dist2);
  }
  const ChannelGains g = gains(s, st.trajectory);
  {
    Eigen::VectorXd a, b;
    const double ts =
        time_of([&] { kernels::ref::ratio_tensor(s, g, st.power, st.eta, a); }, 20);
    const double tp = time_of([&] { kernels::ratio_tensor(s, g, st.power, st.eta, b); }, 20);
    report("ratio tensor", ts, tp, a == b);
  }
  {
    Normalizers a(s.num_clusters(), M, N), b(s.num_clusters(), M, N);
    const double ts =
        time_of([&] { kernels::ref::eta_closed_form(s, g, st.power, nullptr, a); }, 20);
    const double tp =
        time_of([&] { kernels::eta_closed_form(s, g, st.power, nullptr, b); }, 20);
    report("normalizers", ts, tp, a.eta == b.eta);
  }
  {
    kernels::McProblem prob;
    prob.eta = 9e4;
    prob.sigma2 = 1e-11;
    prob.cluster_size = 20;
    prob.signal_amp = Eigen::VectorXd::Constant(20, 1e-5);
    prob.interferer_amp = Eigen::VectorXd::Constant(20, 3e-6);
    kernels::McAccum a, b;
    const double ts = time_of([&] { a = kernels::ref::mc_run(prob, 1'000'000, 5); }, 3);
    const double tp = time_of([&] { b = kernels::mc_run(prob, 1'000'000, 5); }, 3);
    report("monte-carlo mse", ts, tp,
           a.mean == b.mean && a.std_error == b.std_error);
  }
  return 0;
}
