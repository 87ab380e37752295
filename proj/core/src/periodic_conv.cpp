#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include "dnar/error.hpp"
#include "dnar/hydro1d.hpp"

namespace dnar::hydro {

namespace {

// Longer stencils than this (stencil * cells) go through the FFT.
constexpr long kDirectWorkLimit = 1L << 16;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double wrap(double x, double length) {
  double y = std::fmod(x, length);
  if (y > 0.5 * length) y -= length;
  if (y < -0.5 * length) y += length;
  return y;
}

}  // namespace

OffsetKernel::OffsetKernel(const kernel::KernelSpec& spec, double length, double window_radius)
    : spec_(spec), length_(length) {
  spec.validate();
  require(spec.dim == 1, "torus kernels are one-dimensional");
  require(length > 0.0 && std::isfinite(length), "domain length must be positive");
  if (const auto* s = std::get_if<kernel::SmoothCompact>(&spec.form)) {
    support_ = s->radius;
    offset_ = 2.0 * s->amplitude * (8.0 * s->radius / 15.0) / length;
  } else {
    support_ = window_radius > 0.0 ? window_radius : 0.25 * length;
  }
  if (support_ >= 0.5 * length)
    fail(ErrorCode::KernelTooWide, "kernel support " + std::to_string(support_) +
                                       " must be below half the domain length " + std::to_string(0.5 * length));
}

double OffsetKernel::window(double r, double* dchi) const {
  const double half = 0.5 * support_;
  *dchi = 0.0;
  if (r <= half) return 1.0;
  if (r >= support_) return 0.0;
  const double s = (r - half) / half;
  *dchi = -6.0 * s * (1.0 - s) / half;
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

double OffsetKernel::gradient(double x) const {
  const double y = wrap(x, length_);
  const double r = std::abs(y);
  const double sgn = y < 0.0 ? -1.0 : 1.0;
  if (const auto* s = std::get_if<kernel::SmoothCompact>(&spec_.form))
    return sgn * s->amplitude * kernel::bump_primitive(r, s->radius) - offset_ * y;
  double dchi = 0.0;
  const double chi = window(r, &dchi);
  if (chi == 0.0) return 0.0;
  if (const auto* q = std::get_if<kernel::Quadratic>(&spec_.form)) return q->lambda * y * chi;
  const double a = std::get<kernel::WeaklySingular>(spec_.form).alpha;
  return sgn * std::pow(r, 1.0 - a) / (1.0 - a) * chi;
}

double OffsetKernel::weight(double x) const {
  const double r = std::abs(wrap(x, length_));
  if (const auto* s = std::get_if<kernel::SmoothCompact>(&spec_.form))
    return s->amplitude * kernel::bump_profile(r, s->radius) - offset_;
  double dchi = 0.0;
  const double chi = window(r, &dchi);
  if (const auto* q = std::get_if<kernel::Quadratic>(&spec_.form)) return q->lambda * (chi + r * dchi);
  const double a = std::get<kernel::WeaklySingular>(spec_.form).alpha;
  if (r == 0.0) fail(ErrorCode::SingularEvaluation, "weakly singular weight is undefined at 0");
  return std::pow(r, -a) * chi + std::pow(r, 1.0 - a) / (1.0 - a) * dchi;
}

struct PeriodicConvolution::Impl {
  int cells = 0;
  double dx = 0.0;
  Parity parity = Parity::Odd;
  std::vector<double> k;
  int stencil = 0;
  bool fft = false;
  std::vector<std::complex<double>> spectrum;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

PeriodicConvolution::PeriodicConvolution(const std::vector<double>& samples, Parity parity, double dx)
    : impl_(std::make_unique<Impl>()) {
  const int m = static_cast<int>(samples.size());
  require(m >= 1, "convolution needs at least one cell");
  Impl& s = *impl_;
  s.cells = m;
  s.dx = dx;
  s.parity = parity;
  s.k = samples;
  for (int j = 1; j <= m / 2; ++j)
    if (samples[j] != 0.0) s.stencil = j;
  s.fft = static_cast<long>(s.stencil) * m > kDirectWorkLimit;
  if (!s.fft) return;

  const int nc = m / 2 + 1;
  std::vector<double> in(m);
  std::vector<std::complex<double>> out(nc);
  {
    std::lock_guard lock(fftw_planner_mutex());
    s.forward = fftw_plan_dft_r2c_1d(m, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    s.backward = fftw_plan_dft_c2r_1d(m, reinterpret_cast<fftw_complex*>(out.data()), in.data(),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  // Full periodic kernel: k[j] for j <= M/2, mirrored with the parity sign.
  const double sign = parity == Parity::Odd ? -1.0 : 1.0;
  for (int j = 0; j < m; ++j) in[j] = j <= m / 2 ? samples[j] : sign * samples[m - j];
  fftw_execute_dft_r2c(s.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  s.spectrum = out;
}

PeriodicConvolution::~PeriodicConvolution() = default;
PeriodicConvolution::PeriodicConvolution(PeriodicConvolution&&) noexcept = default;
PeriodicConvolution& PeriodicConvolution::operator=(PeriodicConvolution&&) noexcept = default;

bool PeriodicConvolution::uses_fft() const { return impl_->fft; }

void PeriodicConvolution::apply(const std::vector<double>& f, std::vector<double>& out) const {
  const Impl& s = *impl_;
  const int m = s.cells;
  require(static_cast<int>(f.size()) == m, "convolution input has the wrong length");
  out.assign(m, 0.0);

  if (s.fft) {
    std::vector<double> buf(f);
    std::vector<std::complex<double>> spec(m / 2 + 1);
    fftw_execute_dft_r2c(s.forward, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= s.spectrum[j];
    fftw_execute_dft_c2r(s.backward, reinterpret_cast<fftw_complex*>(spec.data()), out.data());
    const double scale = s.dx / m;
    for (double& z : out) z *= scale;
    return;
  }

  const bool odd = s.parity == Parity::Odd;
  for (int i = 0; i < m; ++i) {
    double acc = odd ? 0.0 : s.k[0] * f[i];
    for (int j = 1; j <= s.stencil; ++j) {
      const double kj = s.k[j];
      if (kj == 0.0) continue;
      const int lo = i - j < 0 ? i - j + m : i - j;
      const int hi = i + j >= m ? i + j - m : i + j;
      if (odd) {
        acc += kj * (f[lo] - f[hi]);
      } else if (2 * j == m) {
        acc += kj * f[hi];
      } else {
        acc += kj * (f[lo] + f[hi]);
      }
    }
    out[i] = acc * s.dx;
  }
}

PeriodicConvolution make_gradient_convolution(const OffsetKernel& k, int cells) {
  const double dx = k.length() / cells;
  std::vector<double> samples(cells, 0.0);
  for (int j = 1; j <= cells / 2; ++j) samples[j] = k.gradient(j * dx);
  if (cells % 2 == 0) samples[cells / 2] = 0.0;  // odd and periodic: K'(L/2) = 0
  return PeriodicConvolution(samples, PeriodicConvolution::Parity::Odd, dx);
}

PeriodicConvolution make_weight_convolution(const OffsetKernel& k, int cells) {
  const double dx = k.length() / cells;
  std::vector<double> samples(cells, 0.0);
  for (int j = 0; j <= cells / 2; ++j) samples[j] = k.weight(j * dx);
  return PeriodicConvolution(samples, PeriodicConvolution::Parity::Even, dx);
}

}  // namespace dnar::hydro
