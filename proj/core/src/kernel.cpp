#include "dnar/kernel.hpp"

#include <algorithm>
#include <limits>
#include <type_traits>
#include <cmath>
#include <random>
#include <sstream>

#include "dnar/error.hpp"

namespace dnar::kernel {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dim(std::span<const double> x, int dim) {
  if (static_cast<int>(x.size()) != dim)
    fail(ErrorCode::DimensionMismatch, "vector of length " + std::to_string(x.size()) +
                                           " passed to a kernel of dimension " + std::to_string(dim));
}

// Radial data of the SmoothCompact potential k(r) with k''(r) = a q(r).
// grad K = a * g(r) * x with g(r) = P(r)/r, and
// Hess K = a * [g(r) I - h(r) x x^T] with h(r) = (g(r) - q(r)) / r^2.
// Both g and h are written without division by r inside the support.
struct RadialBump {
  double g;
  double h;
};

RadialBump smooth_compact_radial(double r2, double radius) {
  const double R2 = radius * radius;
  if (r2 <= R2) {
    const double s2 = r2 / R2;
    return {1.0 - 2.0 * s2 / 3.0 + s2 * s2 / 5.0, (4.0 / 3.0 - 4.0 * s2 / 5.0) / R2};
  }
  const double r = std::sqrt(r2);
  const double g = 8.0 * radius / (15.0 * r);
  return {g, g / r2};
}

double bump_from_r2(double r2, double radius) {
  const double R2 = radius * radius;
  if (r2 >= R2) return 0.0;
  const double t = 1.0 - r2 / R2;
  return t * t;
}

}  // namespace

KernelSpec KernelSpec::quadratic(double lambda, int dim) {
  KernelSpec k{Quadratic{lambda}, dim};
  k.validate();
  return k;
}

KernelSpec KernelSpec::weakly_singular(double alpha, int dim) {
  KernelSpec k{WeaklySingular{alpha}, dim};
  k.validate();
  return k;
}

KernelSpec KernelSpec::smooth_compact(double radius, double amplitude, int dim) {
  KernelSpec k{SmoothCompact{radius, amplitude}, dim};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  require(dim >= 1, "kernel dimension must be >= 1");
  if (const auto* q = std::get_if<Quadratic>(&form)) {
    require(std::isfinite(q->lambda) && q->lambda > 0.0, "quadratic kernel needs lambda > 0");
  } else if (const auto* w = std::get_if<WeaklySingular>(&form)) {
    require(w->alpha > 0.0 && w->alpha < 1.0, "weakly singular kernel needs alpha in (0,1)");
  } else {
    const auto& s = std::get<SmoothCompact>(form);
    require(std::isfinite(s.radius) && s.radius > 0.0, "smooth compact kernel needs radius > 0");
    require(std::isfinite(s.amplitude) && s.amplitude > 0.0,
            "smooth compact kernel needs amplitude > 0");
  }
}

std::string KernelSpec::name() const {
  std::ostringstream os;
  if (const auto* q = std::get_if<Quadratic>(&form)) {
    os << "quadratic(lambda=" << q->lambda << ")";
  } else if (const auto* w = std::get_if<WeaklySingular>(&form)) {
    os << "weakly_singular(alpha=" << w->alpha << ")";
  } else {
    const auto& s = std::get<SmoothCompact>(form);
    os << "smooth_compact(radius=" << s.radius << ",amplitude=" << s.amplitude << ")";
  }
  os << "[d=" << dim << "]";
  return os.str();
}

MatrixWeightSpec MatrixWeightSpec::from_kernel(const KernelSpec& k) {
  k.validate();
  return MatrixWeightSpec{k, k.dim};
}

MatrixWeightSpec MatrixWeightSpec::scalar_bump(double radius, double amplitude, int dim) {
  MatrixWeightSpec m{ScalarBump{radius, amplitude}, dim};
  m.validate();
  return m;
}

void MatrixWeightSpec::validate() const {
  require(dim >= 1, "weight dimension must be >= 1");
  if (const auto* k = std::get_if<KernelSpec>(&form)) {
    k->validate();
    require(k->dim == dim, "weight and kernel dimensions differ");
  } else {
    const auto& b = std::get<ScalarBump>(form);
    require(std::isfinite(b.radius) && b.radius > 0.0, "scalar bump needs radius > 0");
    require(std::isfinite(b.amplitude) && b.amplitude > 0.0, "scalar bump needs amplitude > 0");
  }
}

std::string MatrixWeightSpec::name() const {
  if (const auto* k = std::get_if<KernelSpec>(&form)) return "hessian_of:" + k->name();
  const auto& b = std::get<ScalarBump>(form);
  std::ostringstream os;
  os << "scalar_bump(radius=" << b.radius << ",amplitude=" << b.amplitude << ")[d=" << dim << "]";
  return os.str();
}

bool MatrixWeightSpec::singular_at_origin() const {
  const auto* k = std::get_if<KernelSpec>(&form);
  return k != nullptr && std::holds_alternative<WeaklySingular>(k->form);
}

double bump_profile(double r, double radius) {
  const double s = r / radius;
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s * s;
  return t * t;
}

double bump_primitive(double r, double radius) {
  if (r >= radius) return 8.0 * radius / 15.0;
  const double s2 = (r / radius) * (r / radius);
  return r * (1.0 - 2.0 * s2 / 3.0 + s2 * s2 / 5.0);
}

double eval_K(const KernelSpec& spec, std::span<const double> x) {
  check_dim(x, spec.dim);
  const double r2 = norm2(x);
  if (const auto* q = std::get_if<Quadratic>(&spec.form)) return 0.5 * q->lambda * r2;
  if (const auto* w = std::get_if<WeaklySingular>(&spec.form)) {
    const double a = w->alpha;
    return std::pow(r2, 0.5 * (2.0 - a)) / ((2.0 - a) * (1.0 - a));
  }
  const auto& s = std::get<SmoothCompact>(spec.form);
  const double R = s.radius;
  const double R2 = R * R;
  if (r2 <= R2) {
    return s.amplitude * (r2 / 2.0 - r2 * r2 / (6.0 * R2) + r2 * r2 * r2 / (30.0 * R2 * R2));
  }
  const double r = std::sqrt(r2);
  return s.amplitude * (11.0 * R2 / 30.0 + 8.0 * R / 15.0 * (r - R));
}

void eval_gradK(const KernelSpec& spec, std::span<const double> x, std::span<double> out) {
  check_dim(x, spec.dim);
  const double r2 = norm2(x);
  double factor = 0.0;
  if (const auto* q = std::get_if<Quadratic>(&spec.form)) {
    factor = q->lambda;
  } else if (const auto* w = std::get_if<WeaklySingular>(&spec.form)) {
    factor = r2 > 0.0 ? std::pow(r2, -0.5 * w->alpha) / (1.0 - w->alpha) : 0.0;
  } else {
    const auto& s = std::get<SmoothCompact>(spec.form);
    factor = s.amplitude * smooth_compact_radial(r2, s.radius).g;
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = factor * x[i];
}

std::vector<double> eval_gradK(const KernelSpec& spec, std::span<const double> x) {
  std::vector<double> g(x.size());
  eval_gradK(spec, x, g);
  return g;
}

Eigen::MatrixXd eval_Psi(const MatrixWeightSpec& spec, std::span<const double> x) {
  check_dim(x, spec.dim);
  const int d = spec.dim;
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
  const double r2 = norm2(x);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

  if (const auto* b = std::get_if<ScalarBump>(&spec.form)) {
    return b->amplitude * bump_from_r2(r2, b->radius) * I;
  }
  const auto& k = std::get<KernelSpec>(spec.form);
  if (const auto* q = std::get_if<Quadratic>(&k.form)) return q->lambda * I;
  if (const auto* w = std::get_if<WeaklySingular>(&k.form)) {
    if (r2 == 0.0) fail(ErrorCode::SingularEvaluation, "weakly singular Hessian evaluated at 0");
    const double a = w->alpha;
    const double ra = std::pow(r2, -0.5 * a);
    return (ra * I - a * ra / r2 * xv * xv.transpose()) / (1.0 - a);
  }
  const auto& s = std::get<SmoothCompact>(k.form);
  const RadialBump rb = smooth_compact_radial(r2, s.radius);
  return s.amplitude * (rb.g * I - rb.h * xv * xv.transpose());
}

void apply_Psi(const MatrixWeightSpec& spec, std::span<const double> x, std::span<const double> v,
               std::span<double> out) {
  const std::size_t d = x.size();
  const double r2 = norm2(x);
  if (const auto* b = std::get_if<ScalarBump>(&spec.form)) {
    const double f = b->amplitude * bump_from_r2(r2, b->radius);
    for (std::size_t i = 0; i < d; ++i) out[i] = f * v[i];
    return;
  }
  const auto& k = std::get<KernelSpec>(spec.form);
  if (const auto* q = std::get_if<Quadratic>(&k.form)) {
    for (std::size_t i = 0; i < d; ++i) out[i] = q->lambda * v[i];
    return;
  }
  if (const auto* w = std::get_if<WeaklySingular>(&k.form)) {
    if (r2 == 0.0) fail(ErrorCode::SingularEvaluation, "weakly singular Hessian evaluated at 0");
    const double a = w->alpha;
    const double ra = std::pow(r2, -0.5 * a) / (1.0 - a);
    const double xv = dot(x, v);
    for (std::size_t i = 0; i < d; ++i) out[i] = ra * (v[i] - a * x[i] * xv / r2);
    return;
  }
  const auto& s = std::get<SmoothCompact>(k.form);
  const RadialBump rb = smooth_compact_radial(r2, s.radius);
  const double xv = dot(x, v);
  for (std::size_t i = 0; i < d; ++i) out[i] = s.amplitude * (rb.g * v[i] - rb.h * x[i] * xv);
}

bool ValidationReport::passed(double psd_tolerance, double fd_tolerance) const {
  if (symmetry_error != 0.0) return false;
  if (min_eigenvalue < -psd_tolerance) return false;
  if (gradient_fd_error && !(*gradient_fd_error <= fd_tolerance)) return false;
  if (hessian_fd_error && !(*hessian_fd_error <= fd_tolerance)) return false;
  return samples > 0;
}

namespace {

double sampling_scale(const KernelSpec& k) {
  if (const auto* s = std::get_if<SmoothCompact>(&k.form)) return s->radius;
  return 1.0;
}

double sampling_scale(const MatrixWeightSpec& m) {
  if (const auto* b = std::get_if<ScalarBump>(&m.form)) return b->radius;
  return sampling_scale(std::get<KernelSpec>(m.form));
}

// Draws below this radius are excluded for kernels singular at the origin.
// The central-difference error there scales like (h/r)^2, so the cutoff is
// tied to the step: at r = 1000 h it stays near 1e-6 relative.
constexpr double kSingularExclusion = 1e3 * kFiniteDifferenceStep;

double relative_error(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& exact) {
  const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
  return (approx - exact).cwiseAbs().maxCoeff() / scale;
}

double min_sym_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <class Spec>
ValidationReport run_checks(const Spec& spec, const KernelSpec* potential, int samples,
                            std::uint64_t seed) {
  require(samples >= 1, "kernel check needs at least one sample");
  spec.validate();
  const int d = spec.dim;
  const MatrixWeightSpec weight = [&] {
    if constexpr (std::is_same_v<Spec, KernelSpec>) {
      return MatrixWeightSpec::from_kernel(spec);
    } else {
      return spec;
    }
  }();
  const bool singular = weight.singular_at_origin();
  const double scale = sampling_scale(spec);
  const double h = kFiniteDifferenceStep;

  ValidationReport rep;
  rep.kernel = spec.name();
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  if (potential) {
    rep.gradient_fd_error = 0.0;
    rep.hessian_fd_error = 0.0;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> x(d), xm(d), xp(d), gp(d), gm(d);

  while (rep.samples < samples) {
    for (auto& xi : x) xi = normal(rng);
    for (int i = 0; i < d; ++i) xm[i] = -x[i];
    if (singular && std::sqrt(norm2(x)) < kSingularExclusion) {
      ++rep.excluded_samples;
      continue;
    }
    ++rep.samples;

    const Eigen::MatrixXd psi = eval_Psi(weight, x);
    const Eigen::MatrixXd psi_m = eval_Psi(weight, xm);
    rep.symmetry_error = std::max(rep.symmetry_error, (psi - psi_m).cwiseAbs().maxCoeff());
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, min_sym_eigenvalue(psi));

    if (!potential) continue;
    rep.symmetry_error =
        std::max(rep.symmetry_error, std::abs(eval_K(*potential, x) - eval_K(*potential, xm)));

    Eigen::VectorXd grad_fd(d);
    Eigen::MatrixXd hess_fd(d, d);
    for (int k = 0; k < d; ++k) {
      xp = x;
      xm = x;
      xp[k] += h;
      xm[k] -= h;
      grad_fd(k) = (eval_K(*potential, xp) - eval_K(*potential, xm)) / (2.0 * h);
      eval_gradK(*potential, xp, gp);
      eval_gradK(*potential, xm, gm);
      for (int i = 0; i < d; ++i) hess_fd(i, k) = (gp[i] - gm[i]) / (2.0 * h);
    }
    const std::vector<double> g = eval_gradK(*potential, x);
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), d);
    rep.gradient_fd_error = std::max(*rep.gradient_fd_error, relative_error(grad_fd, gv));
    rep.hessian_fd_error = std::max(*rep.hessian_fd_error, relative_error(hess_fd, psi));
  }
  return rep;
}

}  // namespace

ValidationReport check_kernel(const KernelSpec& spec, int samples, std::uint64_t seed) {
  return run_checks(spec, &spec, samples, seed);
}

ValidationReport check_kernel(const MatrixWeightSpec& spec, int samples, std::uint64_t seed) {
  const KernelSpec* potential = std::get_if<KernelSpec>(&spec.form);
  return run_checks(spec, potential, samples, seed);
}

}  // namespace dnar::kernel
