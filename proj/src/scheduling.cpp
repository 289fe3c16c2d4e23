// SPDX-License-Identifier: Apache-2.0
#include "aircomp/scheduling.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <stdexcept>

#include "aircomp/kernels.hpp"

namespace aircomp {

CostTensor hypothetical_ratios(const Scenario& s, const ChannelGains& g,
                               const PowerPlan& power, const Normalizers& eta) {
  CostTensor out(eta.L, eta.M, eta.N);
  kernels::ratio_tensor(s, g, power, eta, out.r);
  return out;
}

DualState init_dual(int L, int M, int N, bool orthogonal) {
  DualState d;
  d.lambda = Eigen::VectorXd::Constant(L * N, 1.0 / double(L * N));
  d.beta = Eigen::VectorXd::Zero(L * N);
  d.nu = Eigen::VectorXd::Zero(orthogonal ? N : M * N);
  d.orthogonal = orthogonal;
  return d;
}

namespace {

inline double nu_at(const DualState& d, int m, int n, int N) {
  return d.orthogonal ? d.nu[n] : d.nu[m * N + n];
}

struct Cell {
  double x;
  int n, m;
};

}  // namespace

std::pair<Assignment, double> primal_update(const CostTensor& costs,
                                            const DualState& dual, int D) {
  const int L = costs.L, M = costs.M, N = costs.N;
  if (D > M * N) throw std::invalid_argument("task count exceeds M*N cells");
  Assignment a(L, M, N);
  double gamma = 0.0;
  std::vector<Cell> cells(M * N);
  for (int l = 0; l < L; ++l) {
    int i = 0;
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n)
        cells[i++] = {dual.lambda[l * N + n] * costs.at(l, m, n) +
                          dual.beta[l * N + n] + nu_at(dual, m, n, N),
                      n, m};
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      if (a.x != b.x) return a.x < b.x;
      if (a.n != b.n) return a.n < b.n;
      return a.m < b.m;
    });
    for (int d = 0; d < D; ++d) {
      a.set(l, cells[d].m, cells[d].n, true);
      gamma = std::max(gamma, costs.at(l, cells[d].m, cells[d].n));
    }
  }
  return {std::move(a), gamma};
}

void dual_update(DualState& dual, const Assignment& raw, const CostTensor& costs,
                 double gamma, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step size must be positive");
  const int L = raw.L, M = raw.M, N = raw.N;
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n) {
      int row = 0;
      for (int m = 0; m < M; ++m) row += raw.active(l, m, n) ? 1 : 0;
      dual.beta[l * N + n] = std::max(0.0, dual.beta[l * N + n] + step * (row - 1));
    }
  if (dual.orthogonal) {
    for (int n = 0; n < N; ++n) {
      int tot = 0;
      for (int l = 0; l < L; ++l)
        for (int m = 0; m < M; ++m) tot += raw.active(l, m, n) ? 1 : 0;
      dual.nu[n] = std::max(0.0, dual.nu[n] + step * (tot - 1));
    }
  } else {
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        int col = 0;
        for (int l = 0; l < L; ++l) col += raw.active(l, m, n) ? 1 : 0;
        dual.nu[m * N + n] = std::max(0.0, dual.nu[m * N + n] + step * (col - 1));
      }
  }
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n) {
      double sub = 0.0;
      for (int m = 0; m < M; ++m)
        if (raw.active(l, m, n)) sub += costs.at(l, m, n) - gamma;
      dual.lambda[l * N + n] = std::max(0.0, dual.lambda[l * N + n] + step * sub);
    }
  const double total = dual.lambda.sum();
  if (total > 1e-300) {
    dual.lambda /= total;
  } else {
    dual.lambda.setConstant(1.0 / double(L * N));  // degenerate projection
  }
  ++dual.step_count;
}

namespace {

struct RankedCell {
  double x;
  int l, m, n;
};

/// Greedy feasibility repair over the globally sorted cost list, then
/// one-level reassignment passes for clusters left short.
Assignment repair(const CostTensor& costs, const DualState& dual, int D,
                  bool orthogonal, bool& counts_met) {
  const int L = costs.L, M = costs.M, N = costs.N;
  std::vector<RankedCell> ranked;
  ranked.reserve(L * M * N);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n)
        ranked.push_back({dual.lambda[l * N + n] * costs.at(l, m, n) +
                              dual.beta[l * N + n] + nu_at(dual, m, n, N),
                          l, m, n});
  std::sort(ranked.begin(), ranked.end(), [](const RankedCell& a, const RankedCell& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.n != b.n) return a.n < b.n;
    if (a.m != b.m) return a.m < b.m;
    return a.l < b.l;
  });

  Assignment a(L, M, N);
  std::vector<int> count(L, 0);
  std::vector<int> cell_owner(M * N, -1);    // cluster holding (m, n)
  std::vector<int> slot_used(L * N, 0);      // cluster l already active at n
  std::vector<int> slot_owner(N, -1);        // orthogonal: cluster at slot n

  auto can_take = [&](int l, int m, int n) {
    if (count[l] >= D) return false;
    if (cell_owner[m * N + n] >= 0) return false;
    if (slot_used[l * N + n]) return false;
    if (orthogonal && slot_owner[n] >= 0) return false;
    return true;
  };
  auto take = [&](int l, int m, int n) {
    a.set(l, m, n, true);
    ++count[l];
    cell_owner[m * N + n] = l;
    slot_used[l * N + n] = 1;
    if (orthogonal) slot_owner[n] = l;
  };

  for (const auto& c : ranked)
    if (can_take(c.l, c.m, c.n)) take(c.l, c.m, c.n);

  // Deficit fixup: free a cell for the short cluster by relocating its
  // current owner to that owner's cheapest compatible free cell. One-level
  // moves, repeated while they make progress.
  auto release = [&](int l, int m, int n) {
    a.set(l, m, n, false);
    --count[l];
    cell_owner[m * N + n] = -1;
    slot_used[l * N + n] = 0;
    if (orthogonal) slot_owner[n] = -1;
  };
  auto try_fill_one = [&](int l) -> bool {
    for (const auto& c : ranked) {
      if (c.l != l || slot_used[l * N + c.n]) continue;
      const int owner = cell_owner[c.m * N + c.n];
      if (owner < 0) {
        if (orthogonal && slot_owner[c.n] >= 0) continue;
        take(l, c.m, c.n);
        return true;
      }
      if (owner == l) continue;
      for (const auto& alt : ranked) {
        if (alt.l != owner || (alt.m == c.m && alt.n == c.n)) continue;
        release(owner, c.m, c.n);
        if (can_take(owner, alt.m, alt.n)) {
          take(owner, alt.m, alt.n);
          if (can_take(l, c.m, c.n)) {
            take(l, c.m, c.n);
            return true;
          }
          release(owner, alt.m, alt.n);
        }
        take(owner, c.m, c.n);  // undo
      }
    }
    return false;
  };
  for (bool progress = true; progress;) {
    progress = false;
    for (int l = 0; l < L; ++l)
      while (count[l] < D && try_fill_one(l)) progress = true;
  }

  counts_met = true;
  for (int l = 0; l < L; ++l) counts_met = counts_met && count[l] == D;
  return a;
}

double max_active_ratio(const CostTensor& costs, const Assignment& a) {
  double g = 0.0;
  for (int l = 0; l < a.L; ++l)
    for (int m = 0; m < a.M; ++m)
      for (int n = 0; n < a.N; ++n)
        if (a.active(l, m, n)) g = std::max(g, costs.at(l, m, n));
  return g;
}

/// Unit-capacity max-flow (Edmonds-Karp) used to decide whether every cluster
/// can hold D cells using only ratios at or below a threshold.
struct FlowNet {
  struct Edge {
    int to, cap, flow;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> adj;

  explicit FlowNet(int nodes) : adj(nodes) {}
  void add(int a, int b, int cap) {
    adj[a].push_back(static_cast<int>(edges.size()));
    edges.push_back({b, cap, 0});
    adj[b].push_back(static_cast<int>(edges.size()));
    edges.push_back({a, 0, 0});
  }
  int max_flow(int s, int t) {
    int total = 0;
    for (;;) {
      std::vector<int> pred(adj.size(), -1);
      std::vector<int> queue{s};
      pred[s] = -2;
      for (std::size_t qi = 0; qi < queue.size() && pred[t] == -1; ++qi) {
        const int u = queue[qi];
        for (int ei : adj[u]) {
          const Edge& e = edges[ei];
          if (pred[e.to] == -1 && e.cap > e.flow) {
            pred[e.to] = ei;
            queue.push_back(e.to);
          }
        }
      }
      if (pred[t] == -1) break;
      for (int v = t; v != s;) {
        const int ei = pred[v];
        edges[ei].flow += 1;
        edges[ei ^ 1].flow -= 1;
        v = edges[ei ^ 1].to;
      }
      ++total;
    }
    return total;
  }
};

/// Feasible assignment using only cells with ratio <= tau, or nullopt.
std::optional<Assignment> assignment_at_threshold(const CostTensor& costs, int D,
                                                  bool orthogonal, double tau) {
  const int L = costs.L, M = costs.M, N = costs.N;
  // Nodes: source | clusters | (l, n) pairs | (m, n) cells | slots | sink.
  const int src = 0;
  const int cluster0 = 1;
  const int pair0 = cluster0 + L;
  const int cell0 = pair0 + L * N;
  const int slot0 = cell0 + M * N;
  const int sink = slot0 + (orthogonal ? N : 0);
  FlowNet net(sink + 1);
  for (int l = 0; l < L; ++l) net.add(src, cluster0 + l, D);
  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n) net.add(cluster0 + l, pair0 + l * N + n, 1);
  std::vector<int> pair_cell_edge(L * M * N, -1);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n)
        if (costs.at(l, m, n) <= tau) {
          pair_cell_edge[costs.idx(l, m, n)] = static_cast<int>(net.edges.size());
          net.add(pair0 + l * N + n, cell0 + m * N + n, 1);
        }
  if (orthogonal) {
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) net.add(cell0 + m * N + n, slot0 + n, 1);
    for (int n = 0; n < N; ++n) net.add(slot0 + n, sink, 1);
  } else {
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) net.add(cell0 + m * N + n, sink, 1);
  }
  if (net.max_flow(src, sink) != L * D) return std::nullopt;
  Assignment a(L, M, N);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        const int ei = pair_cell_edge[costs.idx(l, m, n)];
        if (ei >= 0 && net.edges[ei].flow > 0) a.set(l, m, n, true);
      }
  return a;
}

/// Lowers the incumbent's max active ratio while a full assignment exists
/// strictly below it (bottleneck completion of the repair pass).
void threshold_polish(const CostTensor& costs, int D, bool orthogonal,
                      Assignment& a, double& gamma) {
  std::vector<double> values;
  values.reserve(costs.r.size());
  for (int i = 0; i < costs.r.size(); ++i)
    if (costs.r[i] < gamma) values.push_back(costs.r[i]);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  // Binary search the smallest feasible threshold below the incumbent.
  int lo = 0, hi = static_cast<int>(values.size()) - 1;
  std::optional<Assignment> best;
  double best_gamma = gamma;
  while (lo <= hi) {
    const int mid = (lo + hi) / 2;
    auto cand = assignment_at_threshold(costs, D, orthogonal, values[mid]);
    if (cand) {
      best = std::move(cand);
      best_gamma = max_active_ratio(costs, *best);
      hi = mid - 1;
    } else {
      lo = mid + 1;
    }
  }
  if (best && best_gamma < gamma) {
    a = std::move(*best);
    gamma = best_gamma;
  }
}

}  // namespace

SchedulingResult solve_scheduling(const CostTensor& costs, int D,
                                  const SchedulingOptions& opts) {
  const int L = costs.L, M = costs.M, N = costs.N;
  if (D > M * N) throw std::invalid_argument("task count exceeds M*N cells");
  DualState dual = init_dual(L, M, N, opts.orthogonal);
  SchedulingResult best;
  best.gamma = std::numeric_limits<double>::infinity();

  DualState prev = dual;
  for (int it = 1; it <= opts.max_iters; ++it) {
    auto [raw, raw_gamma] = primal_update(costs, dual, D);

    bool counts_met = false;
    Assignment repaired = repair(costs, dual, D, opts.orthogonal, counts_met);
    if (counts_met) {
      const double g = max_active_ratio(costs, repaired);
      if (g < best.gamma) {
        best.gamma = g;
        best.assignment = std::move(repaired);
        best.counts_met = true;
      }
    }

    prev = dual;
    dual_update(dual, raw, costs, raw_gamma, opts.step0 / std::sqrt(double(it)));
    best.iterations = it;

    const double change =
        std::max({(dual.lambda - prev.lambda).cwiseAbs().maxCoeff(),
                  (dual.beta - prev.beta).cwiseAbs().maxCoeff(),
                  (dual.nu - prev.nu).cwiseAbs().maxCoeff()});
    if (change < opts.tol) {
      best.converged = true;
      break;
    }
  }

  if (!best.counts_met) {
    // The greedy repair never completed; fall back to an exact feasibility
    // matching with no ratio cap.
    auto full = assignment_at_threshold(costs, D, opts.orthogonal,
                                        std::numeric_limits<double>::infinity());
    if (full) {
      best.assignment = std::move(*full);
      best.counts_met = true;
      best.gamma = max_active_ratio(costs, best.assignment);
    } else {
      bool met = false;
      best.assignment = repair(costs, dual, D, opts.orthogonal, met);
      best.counts_met = met;
      best.gamma = max_active_ratio(costs, best.assignment);
      return best;
    }
  }
  threshold_polish(costs, D, opts.orthogonal, best.assignment, best.gamma);
  return best;
}

}  // namespace aircomp
