#include <algorithm>
#include <limits>
#include <numeric>

#include "ot_solvers.hpp"

namespace dnar::transport::detail {

// Residual network of the transportation problem: forward arcs source i ->
// sink j with unbounded capacity and cost c_ij, backward arcs j -> i with
// capacity flow_ij and cost -c_ij. Node potentials keep every residual arc's
// reduced cost c + p(tail) - p(head) nonnegative, so Dijkstra applies.
FlowSolution solve_min_cost_flow(std::span<const double> a, std::span<const double> b,
                                 std::span<const double> cost) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> supply(a.begin(), a.end());
  std::vector<double> demand(b.begin(), b.end());
  const double total = std::max(std::accumulate(a.begin(), a.end(), 0.0), std::accumulate(b.begin(), b.end(), 0.0));
  // Residual masses below this are treated as exhausted.
  const double eps = 1e-14 * std::max(1.0, total);

  std::vector<double> flow(n * m, 0.0);
  std::vector<double> ps(n, 0.0), pt(m, 0.0);
  std::vector<double> ds(n), dt(m);
  std::vector<char> done_s(n), done_t(m);
  std::vector<std::size_t> parent_s(n), parent_t(m);  // parent_s: sink index, parent_t: source index
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

  auto remaining = [&](const std::vector<double>& r) {
    return std::any_of(r.begin(), r.end(), [&](double z) { return z > eps; });
  };

  while (remaining(supply) && remaining(demand)) {
    std::fill(ds.begin(), ds.end(), inf);
    std::fill(dt.begin(), dt.end(), inf);
    std::fill(done_s.begin(), done_s.end(), 0);
    std::fill(done_t.begin(), done_t.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (supply[i] > eps) {
        ds[i] = 0.0;
        parent_s[i] = none;
      }
    }

    std::size_t target = none;
    double target_dist = inf;
    for (;;) {
      // Dense Dijkstra: pick the closest unfinished node of either side.
      double best = inf;
      std::size_t best_idx = none;
      bool best_is_sink = false;
      for (std::size_t i = 0; i < n; ++i)
        if (!done_s[i] && ds[i] < best) {
          best = ds[i];
          best_idx = i;
          best_is_sink = false;
        }
      for (std::size_t j = 0; j < m; ++j)
        if (!done_t[j] && dt[j] < best) {
          best = dt[j];
          best_idx = j;
          best_is_sink = true;
        }
      if (best_idx == none) break;

      if (best_is_sink) {
        const std::size_t j = best_idx;
        done_t[j] = 1;
        if (demand[j] > eps) {
          target = j;
          target_dist = best;
          break;
        }
        for (std::size_t i = 0; i < n; ++i) {
          if (done_s[i] || flow[i * m + j] <= 0.0) continue;
          const double rc = std::max(0.0, -cost[i * m + j] + pt[j] - ps[i]);
          if (best + rc < ds[i]) {
            ds[i] = best + rc;
            parent_s[i] = j;
          }
        }
      } else {
        const std::size_t i = best_idx;
        done_s[i] = 1;
        for (std::size_t j = 0; j < m; ++j) {
          if (done_t[j]) continue;
          const double rc = std::max(0.0, cost[i * m + j] + ps[i] - pt[j]);
          if (best + rc < dt[j]) {
            dt[j] = best + rc;
            parent_t[j] = i;
          }
        }
      }
    }
    if (target == none) break;  // no augmenting path; cannot happen for balanced data

    for (std::size_t i = 0; i < n; ++i) ps[i] += std::min(ds[i], target_dist);
    for (std::size_t j = 0; j < m; ++j) pt[j] += std::min(dt[j], target_dist);

    // Bottleneck along the path back from the target sink.
    double delta = demand[target];
    std::size_t j = target;
    std::size_t root = none;
    for (;;) {
      const std::size_t i = parent_t[j];
      if (parent_s[i] == none) {
        root = i;
        break;
      }
      const std::size_t jp = parent_s[i];
      delta = std::min(delta, flow[i * m + jp]);
      j = jp;
    }
    delta = std::min(delta, supply[root]);

    j = target;
    for (;;) {
      const std::size_t i = parent_t[j];
      flow[i * m + j] += delta;
      if (parent_s[i] == none) break;
      const std::size_t jp = parent_s[i];
      flow[i * m + jp] -= delta;
      if (flow[i * m + jp] < eps * 1e-3) flow[i * m + jp] = 0.0;
      j = jp;
    }
    supply[root] -= delta;
    demand[target] -= delta;
    if (supply[root] <= eps) supply[root] = 0.0;
    if (demand[target] <= eps) demand[target] = 0.0;
  }

  FlowSolution sol;
  sol.flow = std::move(flow);
  sol.f.resize(n);
  sol.g.resize(m);
  for (std::size_t i = 0; i < n; ++i) sol.f[i] = -ps[i];
  for (std::size_t j = 0; j < m; ++j) sol.g[j] = pt[j];
  return sol;
}

}  // namespace dnar::transport::detail
