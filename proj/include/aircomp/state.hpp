// SPDX-License-Identifier: Apache-2.0
//
// Mutable solver state blocks: binary scheduling tensor, per-device transmit
// powers, receive normalizing factors, and UAV waypoint sequences.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace aircomp {

/// Binary cluster scheduling / association tensor a_{l,m}[n].
struct Assignment {
  int L = 0, M = 0, N = 0;
  std::vector<std::uint8_t> a;  // L*M*N, cluster-major then uav then slot

  Assignment() = default;
  Assignment(int l, int m, int n) : L(l), M(m), N(n), a(l * m * n, 0) {}

  int idx(int l, int m, int n) const { return (l * M + m) * N + n; }
  bool active(int l, int m, int n) const { return a[idx(l, m, n)] != 0; }
  void set(int l, int m, int n, bool v) { a[idx(l, m, n)] = v ? 1 : 0; }

  /// UAV serving cluster l at slot n, or -1 when unscheduled.
  int uav_of(int l, int n) const {
    for (int m = 0; m < M; ++m)
      if (active(l, m, n)) return m;
    return -1;
  }
  /// Cluster served by UAV m at slot n, or -1 when idle.
  int cluster_of(int m, int n) const {
    for (int l = 0; l < L; ++l)
      if (active(l, m, n)) return l;
    return -1;
  }
  int task_count(int l) const {
    int c = 0;
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) c += active(l, m, n) ? 1 : 0;
    return c;
  }
};

/// Transmit powers p_k[n] in watts, device-major.
struct PowerPlan {
  int K = 0, N = 0;
  Eigen::VectorXd p;

  PowerPlan() = default;
  PowerPlan(int k, int n) : K(k), N(n), p(Eigen::VectorXd::Zero(k * n)) {}
  int idx(int k, int n) const { return k * N + n; }
  double at(int k, int n) const { return p[idx(k, n)]; }
  double& at(int k, int n) { return p[idx(k, n)]; }
  double spent(int k) const { return p.segment(k * N, N).sum(); }
};

/// Receive scaling factors eta_{l,m}[n]; zero on inactive triples.
struct Normalizers {
  int L = 0, M = 0, N = 0;
  Eigen::VectorXd eta;

  Normalizers() = default;
  Normalizers(int l, int m, int n)
      : L(l), M(m), N(n), eta(Eigen::VectorXd::Zero(l * m * n)) {}
  int idx(int l, int m, int n) const { return (l * M + m) * N + n; }
  double at(int l, int m, int n) const { return eta[idx(l, m, n)]; }
  double& at(int l, int m, int n) { return eta[idx(l, m, n)]; }
};

/// Horizontal waypoints q_m[n]. Column n-1 holds the slot-n position for
/// n = 1..N; the mission is cyclic with q_m[0] = q_m[N] (the trajectory
/// closes on itself), so position(m, 0) aliases the last column.
struct TrajectorySet {
  int M = 0, N = 0;
  std::vector<Eigen::Matrix2Xd> waypoints;  // one 2xN matrix per UAV

  TrajectorySet() = default;
  TrajectorySet(int m, int n) : M(m), N(n), waypoints(m, Eigen::Matrix2Xd::Zero(2, n)) {}

  /// Position at paper slot index n in 0..N.
  Eigen::Vector2d position(int m, int n) const {
    if (n < 0 || n > N) throw std::out_of_range("slot index out of range");
    return n == 0 ? waypoints[m].col(N - 1) : waypoints[m].col(n - 1);
  }
  /// Position used by slot n in 0..N-1 (code indexing).
  Eigen::Vector2d slot_position(int m, int n) const { return waypoints[m].col(n); }
};

}  // namespace aircomp
