#include <limits>
#include <vector>

#include "dnar/error.hpp"
#include "ot_solvers.hpp"

namespace dnar::transport::detail {

LpSolution solve_lp_max(std::span<const double> c, std::span<const double> A, std::span<const double> b,
                        std::size_t rows, std::size_t cols) {
  constexpr double tol = 1e-12;
  const std::size_t width = cols + rows + 1;  // structural, slack, rhs
  const std::size_t rhs = width - 1;
  std::vector<double> T((rows + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t k) -> double& { return T[r * width + k]; };

  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    require(b[r] >= 0.0, "dense LP requires b >= 0");
    for (std::size_t k = 0; k < cols; ++k) at(r, k) = A[r * cols + k];
    at(r, cols + r) = 1.0;
    at(r, rhs) = b[r];
    basis[r] = cols + r;
  }
  for (std::size_t k = 0; k < cols; ++k) at(rows, k) = -c[k];

  for (;;) {
    // Bland: lowest-index improving column, ties in the ratio test broken by
    // lowest basic index. Guarantees termination on degenerate problems.
    std::size_t enter = width;
    for (std::size_t k = 0; k < rhs; ++k) {
      if (at(rows, k) < -tol) {
        enter = k;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = at(r, enter);
      if (a <= tol) continue;
      const double ratio = at(r, rhs) / a;
      if (leave == rows || ratio < best_ratio - tol) {
        best_ratio = ratio;
        leave = r;
      } else if (ratio <= best_ratio + tol && basis[r] < basis[leave]) {
        leave = r;
      }
    }
    if (leave == rows) fail(ErrorCode::InvalidArgument, "dense LP is unbounded");

    const double piv = at(leave, enter);
    for (std::size_t k = 0; k < width; ++k) at(leave, k) /= piv;
    for (std::size_t r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      double* dst = &T[r * width];
      const double* src = &T[leave * width];
      for (std::size_t k = 0; k < width; ++k) dst[k] -= f * src[k];
    }
    basis[leave] = enter;
  }

  LpSolution sol;
  sol.x.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    if (basis[r] < cols) sol.x[basis[r]] = at(r, rhs);
  sol.value = 0.0;
  for (std::size_t k = 0; k < cols; ++k) sol.value += c[k] * sol.x[k];
  return sol;
}

}  // namespace dnar::transport::detail
