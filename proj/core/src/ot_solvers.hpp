#pragma once

// Internal exact solvers behind dnar::transport.

#include <cstddef>
#include <span>
#include <vector>

namespace dnar::transport::detail {

struct AssignmentSolution {
  std::vector<std::size_t> col_of_row;  // permutation
  std::vector<double> u;                // row potentials
  std::vector<double> v;                // column potentials, u_i + v_j <= c_ij
};

/// Min-cost perfect matching on a dense n x n cost matrix (shortest augmenting
/// path Hungarian method, O(n^3)).
AssignmentSolution solve_assignment(std::span<const double> cost, std::size_t n);

struct FlowSolution {
  std::vector<double> flow;  // dense n x m
  std::vector<double> f;     // source duals
  std::vector<double> g;     // sink duals, f_i + g_j <= c_ij
};

/// Transportation problem with real supplies a and demands b by successive
/// shortest paths with Dijkstra on reduced costs. Costs must be >= 0.
FlowSolution solve_min_cost_flow(std::span<const double> a, std::span<const double> b,
                                 std::span<const double> cost);

struct LpSolution {
  double value = 0.0;
  std::vector<double> x;
};

/// max c^T x subject to A x <= b, x >= 0, with b >= 0 (the origin is a
/// feasible basis). Dense tableau simplex with Bland's rule. A is row-major
/// rows x cols.
LpSolution solve_lp_max(std::span<const double> c, std::span<const double> A, std::span<const double> b,
                        std::size_t rows, std::size_t cols);

}  // namespace dnar::transport::detail
