#pragma once

// 1D periodic finite-volume solver for the macroscopic DNAR system
//   rho_t + (rho u)_x = 0,  (rho w)_t + (rho u w)_x = 0,  u = w - K' * rho
// on the torus [0, L), with diagnostics.

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "dnar/grid_field.hpp"
#include "dnar/kernel.hpp"

namespace dnar::hydro {

/// 1D kernel on the torus. SmoothCompact is periodized as
/// K'(x) - psi_bar * x on [-L/2, L/2] so the offset gradient is continuous and
/// odd; Quadratic and WeaklySingular gradients are tapered to zero by a C1
/// window that is exactly 1 on [0, window/2].
class OffsetKernel {
 public:
  /// window_radius <= 0 selects L/4 for the windowed kernels. Throws
  /// KernelTooWide when the support reaches L/2.
  OffsetKernel(const kernel::KernelSpec& spec, double length, double window_radius = 0.0);

  double gradient(double x) const;  // K'(x), any real x (periodic)
  double weight(double x) const;    // K''(x), the scalar communication weight
  double support() const { return support_; }
  double length() const { return length_; }
  const kernel::KernelSpec& spec() const { return spec_; }
  /// The constant psi_bar subtracted by the periodization (0 for windowed kernels).
  double offset() const { return offset_; }

 private:
  double window(double r, double* dchi) const;

  kernel::KernelSpec spec_;
  double length_;
  double support_;
  double offset_ = 0.0;
};

/// conv_i = sum_j k(x_i - x_j) f_j dx on a uniform periodic grid, for an odd
/// or even sampled kernel k. Direct stencil sum for short stencils, FFT
/// otherwise.
class PeriodicConvolution {
 public:
  enum class Parity { Odd, Even };
  PeriodicConvolution(const std::vector<double>& samples, Parity parity, double dx);
  ~PeriodicConvolution();
  PeriodicConvolution(PeriodicConvolution&&) noexcept;
  PeriodicConvolution& operator=(PeriodicConvolution&&) noexcept;

  void apply(const std::vector<double>& f, std::vector<double>& out) const;
  bool uses_fft() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Samples of K' (Odd) or K'' (Even) at m*dx, m = 0..M-1.
PeriodicConvolution make_gradient_convolution(const OffsetKernel& k, int cells);
PeriodicConvolution make_weight_convolution(const OffsetKernel& k, int cells);

enum class Limiter { None, Minmod };

struct HydroConfig {
  kernel::KernelSpec kernel = kernel::KernelSpec::smooth_compact(0.25, 1.0, 1);
  double window_radius = 0.0;  // windowed kernels only; <= 0 means L/4
  double cfl = 0.4;
  double t_final = 1.0;
  Limiter limiter = Limiter::None;
  double record_every = 0.0;  // time between frames; <= 0 records every step
  long max_steps = 50'000'000;

  void validate() const;
};

/// u_i = w_i - sum_j K'(x_i - x_j) rho_j dx.
std::vector<double> compute_u(const GridField1D& field, const OffsetKernel& k);

class Solver {
 public:
  Solver(const HydroConfig& cfg, double length, int cells);

  const OffsetKernel& kernel() const { return kernel_; }
  std::vector<double> velocity(const GridField1D& field) const;
  /// CFL step size for the current state.
  double stable_dt(const GridField1D& field) const;
  /// One SSP-RK2 step of size dt. Throws NonFiniteState.
  void step(GridField1D& field, double dt) const;
  /// Step with the CFL size.
  void step(GridField1D& field) const { step(field, stable_dt(field)); }

 private:
  void rhs(const std::vector<double>& rho, const std::vector<double>& m, const std::vector<double>& w,
           std::vector<double>& drho, std::vector<double>& dm, std::vector<double>& dw) const;

  HydroConfig cfg_;
  double length_;
  int cells_;
  OffsetKernel kernel_;
  PeriodicConvolution conv_;
};

struct HydroFrame {
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> w;
  std::vector<double> u;
};

/// Recorded solution with interpolants: linear in x between cell centres,
/// nearest recorded frame in t.
struct HydroSolution {
  double length = 1.0;
  int cells = 0;
  long steps = 0;
  std::vector<HydroFrame> frames;

  double dx() const { return length / cells; }
  std::size_t frame_at(double t) const;
  double rho(double t, double x) const;
  double u(double t, double x) const;
  double w(double t, double x) const;
  GridField1D field(std::size_t frame) const;
};

HydroSolution solve(const GridField1D& initial, const HydroConfig& cfg);

/// L1 distance between a field on M cells and one on 2M cells averaged back to M.
double l1_coarse_difference(const std::vector<double>& coarse, const std::vector<double>& fine, double dx_coarse);

struct EMonitor {
  std::vector<double> t;
  std::vector<double> integral;      // integral of D_x w, zero by telescoping
  std::vector<double> identity_gap;  // max |D_x w - (D_x u + psi-term)|, when psi is given
  std::vector<double> residual;      // L1 residual of e_t + (u e)_x on each frame interval
  double max_abs_integral() const;
  double max_identity_gap() const;
  double max_residual() const;
};

/// e = D_x w (centred differences). With psi, also checks
/// D_x w = D_x u + sum_y psi(x - y)(rho(y) - rho(x)) dy.
EMonitor e_monitor(const HydroSolution& sol, const OffsetKernel* psi = nullptr);

/// Product bump (1 - s^2)^3 on |s| < 1.
double bump(double s);
double bump_derivative(double s);

struct TestFunction {
  double t_center, t_half;
  double x_center, x_half;  // periodic in x
  double w_center, w_half;
};

/// 3 x 3 x 3 tensor family: t-centres {0, T/4, T/2} (half-width 0.4T),
/// x-centres {L/6, L/2, 5L/6} (half-width L/4), omega-centres at min, middle
/// and max of the initial w (half-width 0.75 * max(range, 1e-3)).
std::vector<TestFunction> residual_test_family(const HydroSolution& sol);

/// max over the family of |R[eta]| for the monokinetic lift rho delta(omega - w),
/// trapezoid rule in t over recorded frames, midpoint rule in x.
double kinetic_residual(const HydroSolution& sol, const std::vector<TestFunction>& family);
double kinetic_residual(const HydroSolution& sol);

/// Time-averaged discrete L1 residual of the alignment momentum equation
/// (rho u)_t + (rho u^2)_x - rho (psi*(rho u) - u psi*rho) for the (rho, u)
/// recovered from a DNAR solution.
double eam_residual(const HydroSolution& sol, const OffsetKernel& psi_source);

}  // namespace dnar::hydro
