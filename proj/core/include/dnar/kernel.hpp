#pragma once

// Interaction potentials K, their gradients and Hessians, and matrix-valued
// communication weights Psi. All evaluations are pure functions of their
// arguments.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace dnar::kernel {

/// K(x) = (lambda/2)|x|^2.
struct Quadratic {
  double lambda = 1.0;
};

/// K(x) = |x|^(2-alpha) / ((2-alpha)(1-alpha)), alpha in (0,1).
struct WeaklySingular {
  double alpha = 0.5;
};

/// Radial potential whose radial second derivative is the bump
/// a*(1-(r/R)^2)^2 on [0,R] and zero beyond. In one dimension its Hessian is
/// exactly the ScalarBump weight with the same (R, a).
struct SmoothCompact {
  double radius = 1.0;
  double amplitude = 1.0;
};

struct KernelSpec {
  std::variant<Quadratic, WeaklySingular, SmoothCompact> form;
  int dim = 1;

  static KernelSpec quadratic(double lambda, int dim);
  static KernelSpec weakly_singular(double alpha, int dim);
  static KernelSpec smooth_compact(double radius, double amplitude, int dim);

  void validate() const;
  std::string name() const;
};

/// Psi(x) = a * q(|x|) * I with q(r) = (1-(r/R)^2)^2 for r <= R, 0 otherwise.
struct ScalarBump {
  double radius = 1.0;
  double amplitude = 1.0;
};

struct MatrixWeightSpec {
  std::variant<KernelSpec, ScalarBump> form;
  int dim = 1;

  static MatrixWeightSpec from_kernel(const KernelSpec& k);
  static MatrixWeightSpec scalar_bump(double radius, double amplitude, int dim);

  void validate() const;
  std::string name() const;
  /// True when Psi(0) is undefined (Hessian of the weakly singular kernel).
  bool singular_at_origin() const;
};

/// Bump profile q(r) = (1-(r/R)^2)^2 on [0,R], zero outside.
double bump_profile(double r, double radius);
/// Integral of the bump profile from 0 to r.
double bump_primitive(double r, double radius);

double eval_K(const KernelSpec& spec, std::span<const double> x);

/// Analytic gradient, with grad K(0) := 0 for every variant.
void eval_gradK(const KernelSpec& spec, std::span<const double> x, std::span<double> out);
std::vector<double> eval_gradK(const KernelSpec& spec, std::span<const double> x);

/// Throws SingularEvaluation for the weakly singular Hessian at x = 0.
Eigen::MatrixXd eval_Psi(const MatrixWeightSpec& spec, std::span<const double> x);

/// out = Psi(x) * v without forming the matrix. Hot path of the particle
/// force loops.
void apply_Psi(const MatrixWeightSpec& spec, std::span<const double> x, std::span<const double> v,
               std::span<double> out);

struct ValidationReport {
  std::string kernel;
  int samples = 0;
  double symmetry_error = 0.0;     // max |K(x)-K(-x)| or max |Psi(x)-Psi(-x)|
  double min_eigenvalue = 0.0;     // min over samples of lambda_min((Psi+Psi^T)/2)
  std::optional<double> gradient_fd_error;  // grad K vs central differences of K
  std::optional<double> hessian_fd_error;   // Psi vs central differences of grad K
  int excluded_samples = 0;        // draws rejected as too close to a singular point

  bool passed(double psd_tolerance = 1e-12, double fd_tolerance = 1e-5) const;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

ValidationReport check_kernel(const KernelSpec& spec, int samples, std::uint64_t seed);
ValidationReport check_kernel(const MatrixWeightSpec& spec, int samples, std::uint64_t seed);

}  // namespace dnar::kernel
