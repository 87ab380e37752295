#include "dnar/particle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dnar/error.hpp"

namespace dnar::particle {

Ensemble::Ensemble(int dim_, int count_)
    : dim(dim_),
      count(count_),
      x(static_cast<std::size_t>(dim_) * count_, 0.0),
      v(static_cast<std::size_t>(dim_) * count_, 0.0),
      omega(static_cast<std::size_t>(dim_) * count_, 0.0) {}

void Ensemble::validate() const {
  require(dim >= 1, "ensemble dimension must be >= 1");
  require(count >= 1, "ensemble needs at least one particle");
  const std::size_t n = static_cast<std::size_t>(dim) * count;
  require(x.size() == n && v.size() == n && omega.size() == n, "ensemble arrays must be N x d");
  auto finite = [](const std::vector<double>& a) {
    return std::all_of(a.begin(), a.end(), [](double z) { return std::isfinite(z); });
  };
  if (!finite(x) || !finite(v) || !finite(omega) || !std::isfinite(t))
    fail(ErrorCode::NonFiniteState, "ensemble contains non-finite entries");
}

void IntegratorConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "integrator dt must be > 0");
  require(std::isfinite(t_final) && t_final > 0.0, "integrator t_final must be > 0");
  require(dt <= t_final, "integrator dt must not exceed t_final");
  require(record_every >= 1, "record_every must be >= 1");
  require(t_final / dt < 1e15, "t_final/dt too large");
}

long IntegratorConfig::steps() const { return std::max(1L, std::lround(t_final / dt)); }

Ensemble Trajectory::ensemble_at(std::size_t frame) const {
  Ensemble e(dim, count);
  const Frame& f = frames.at(frame);
  e.x = f.x;
  e.v = f.v;
  e.omega = f.omega;
  e.t = f.t;
  return e;
}

namespace {

// Non-allocating kernels shared by the public helpers and the integrators.
void dnar_velocity_into(std::span<const double> x, std::span<const double> omega, int n, int d,
                        const kernel::KernelSpec& k, std::span<double> v) {
  std::vector<double> diff(d), g(d), acc(d);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      for (int c = 0; c < d; ++c) diff[c] = x[i * d + c] - x[j * d + c];
      kernel::eval_gradK(k, diff, g);
      for (int c = 0; c < d; ++c) acc[c] += g[c];
    }
    for (int c = 0; c < d; ++c) v[i * d + c] = omega[i * d + c] - inv_n * acc[c];
  }
}

void cs_rhs_into(std::span<const double> x, std::span<const double> v, int n, int d,
                 const kernel::MatrixWeightSpec& psi, std::span<double> a) {
  std::vector<double> diff(d), dv(d), f(d), acc(d);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      for (int c = 0; c < d; ++c) {
        diff[c] = x[i * d + c] - x[j * d + c];
        dv[c] = v[j * d + c] - v[i * d + c];
      }
      kernel::apply_Psi(psi, diff, dv, f);
      for (int c = 0; c < d; ++c) acc[c] += f[c];
    }
    for (int c = 0; c < d; ++c) a[i * d + c] = inv_n * acc[c];
  }
}

bool all_finite(const std::vector<double>& y) {
  return std::all_of(y.begin(), y.end(), [](double z) { return std::isfinite(z); });
}

using Rhs = std::function<void(const std::vector<double>& y, std::vector<double>& dy)>;

// Fixed-step integration of y' = f(y); `record` is called with the step index
// and state at every recorded time.
template <class Record>
void march(std::vector<double> y, const Rhs& f, const IntegratorConfig& cfg, Record&& record) {
  cfg.validate();
  const long steps = cfg.steps();
  const double h = cfg.t_final / static_cast<double>(steps);
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  record(0L, y);
  for (long s = 1; s <= steps; ++s) {
    if (cfg.scheme == Scheme::ForwardEuler) {
      f(y, k1);
      for (std::size_t i = 0; i < n; ++i) y[i] += h * k1[i];
    } else {
      f(y, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      f(tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      f(tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
      f(tmp, k4);
      for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    if (!all_finite(y))
      fail(ErrorCode::NonFiniteState, "state became non-finite at step " + std::to_string(s));
    if (s % cfg.record_every == 0 || s == steps) record(s, y);
  }
}

double step_time(const IntegratorConfig& cfg, long s) {
  return cfg.t_final * static_cast<double>(s) / static_cast<double>(cfg.steps());
}

}  // namespace

std::vector<double> dnar_velocity(const Ensemble& ens, const kernel::KernelSpec& k) {
  ens.validate();
  require(k.dim == ens.dim, "kernel and ensemble dimensions differ");
  std::vector<double> v(ens.x.size());
  dnar_velocity_into(ens.x, ens.omega, ens.count, ens.dim, k, v);
  return v;
}

std::vector<double> cs_rhs(const Ensemble& ens, const kernel::MatrixWeightSpec& psi) {
  ens.validate();
  require(psi.dim == ens.dim, "weight and ensemble dimensions differ");
  std::vector<double> a(ens.v.size());
  cs_rhs_into(ens.x, ens.v, ens.count, ens.dim, psi, a);
  return a;
}

Trajectory integrate_first_order(const Ensemble& ens0, const VelocityField& field,
                                 const IntegratorConfig& cfg) {
  ens0.validate();
  Trajectory traj{ens0.dim, ens0.count, {}};
  Rhs rhs = [&](const std::vector<double>& y, std::vector<double>& dy) { field(y, dy); };
  std::vector<double> vel(ens0.x.size());
  march(ens0.x, rhs, cfg, [&](long s, const std::vector<double>& y) {
    field(y, vel);
    traj.frames.push_back(Frame{ens0.t + step_time(cfg, s), y, vel, ens0.omega});
  });
  return traj;
}

Trajectory integrate_second_order(const Ensemble& ens0, const AccelerationField& accel,
                                  const IntegratorConfig& cfg) {
  ens0.validate();
  const std::size_t n = ens0.x.size();
  Trajectory traj{ens0.dim, ens0.count, {}};
  Rhs rhs = [&](const std::vector<double>& y, std::vector<double>& dy) {
    std::span<const double> ys(y);
    std::copy(y.begin() + n, y.end(), dy.begin());
    accel(ys.first(n), ys.subspan(n), std::span<double>(dy).subspan(n));
  };
  std::vector<double> y0(2 * n);
  std::copy(ens0.x.begin(), ens0.x.end(), y0.begin());
  std::copy(ens0.v.begin(), ens0.v.end(), y0.begin() + n);
  march(std::move(y0), rhs, cfg, [&](long s, const std::vector<double>& y) {
    traj.frames.push_back(Frame{ens0.t + step_time(cfg, s), {y.begin(), y.begin() + n},
                                {y.begin() + n, y.end()}, ens0.omega});
  });
  return traj;
}

Trajectory integrate_dnar(const Ensemble& ens0, const kernel::KernelSpec& k, const IntegratorConfig& cfg) {
  require(k.dim == ens0.dim, "kernel and ensemble dimensions differ");
  const int n = ens0.count;
  const int d = ens0.dim;
  const std::vector<double> omega = ens0.omega;
  return integrate_first_order(
      ens0, [&](std::span<const double> x, std::span<double> v) { dnar_velocity_into(x, omega, n, d, k, v); },
      cfg);
}

Trajectory integrate_cs(const Ensemble& ens0, const kernel::MatrixWeightSpec& psi,
                        const IntegratorConfig& cfg) {
  require(psi.dim == ens0.dim, "weight and ensemble dimensions differ");
  const int n = ens0.count;
  const int d = ens0.dim;
  return integrate_second_order(
      ens0,
      [&](std::span<const double> x, std::span<const double> v, std::span<double> a) {
        cs_rhs_into(x, v, n, d, psi, a);
      },
      cfg);
}

EquivalenceReport equivalence_check(const Ensemble& ens0, const kernel::KernelSpec& k,
                                    const IntegratorConfig& cfg) {
  const Trajectory first = integrate_dnar(ens0, k, cfg);
  Ensemble cs0 = ens0;
  cs0.v = dnar_velocity(ens0, k);
  const Trajectory second = integrate_cs(cs0, kernel::MatrixWeightSpec::from_kernel(k), cfg);

  EquivalenceReport rep;
  const int d = ens0.dim;
  for (std::size_t f = 0; f < first.frames.size(); ++f) {
    const Frame& a = first.frames[f];
    const Frame& b = second.frames[f];
    for (int i = 0; i < ens0.count; ++i) {
      double dx = 0.0, dv = 0.0;
      for (int c = 0; c < d; ++c) {
        dx += (a.x[i * d + c] - b.x[i * d + c]) * (a.x[i * d + c] - b.x[i * d + c]);
        dv += (a.v[i * d + c] - b.v[i * d + c]) * (a.v[i * d + c] - b.v[i * d + c]);
      }
      rep.max_position_gap = std::max(rep.max_position_gap, std::sqrt(dx));
      rep.max_velocity_gap = std::max(rep.max_velocity_gap, std::sqrt(dv));
    }
  }
  return rep;
}

Diagnostics diagnostics(const Trajectory& traj) {
  require(!traj.frames.empty(), "diagnostics need a nonempty trajectory");
  const int n = traj.count;
  const int d = traj.dim;
  Diagnostics out;
  auto diameter = [&](const std::vector<double>& a) {
    double best = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += (a[i * d + c] - a[j * d + c]) * (a[i * d + c] - a[j * d + c]);
        best = std::max(best, s);
      }
    return std::sqrt(best);
  };
  auto mean = [&](const std::vector<double>& a) {
    std::vector<double> m(d, 0.0);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) m[c] += a[i * d + c];
    for (double& z : m) z /= n;
    return m;
  };
  for (const Frame& f : traj.frames) {
    out.t.push_back(f.t);
    double e = 0.0;
    for (double z : f.v) e += z * z;
    out.kinetic_energy.push_back(0.5 * e / n);
    out.momentum.push_back(mean(f.v));
    out.center_of_mass.push_back(mean(f.x));
    out.velocity_diameter.push_back(diameter(f.v));
    out.position_diameter.push_back(diameter(f.x));
  }
  return out;
}

}  // namespace dnar::particle
