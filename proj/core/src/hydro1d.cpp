#include "dnar/hydro1d.hpp"

#include <algorithm>
#include <cmath>

#include "dnar/error.hpp"

namespace dnar::hydro {

namespace {

constexpr double kVacuum = 1e-14;
constexpr double kMinSpeed = 1e-12;

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

int wrap_index(int i, int m) { return ((i % m) + m) % m; }

double interpolate(const std::vector<double>& f, double length, double x) {
  const int m = static_cast<int>(f.size());
  const double dx = length / m;
  const double s = x / dx - 0.5;
  const double fl = std::floor(s);
  const double theta = s - fl;
  const int i0 = wrap_index(static_cast<int>(fl), m);
  const int i1 = wrap_index(i0 + 1, m);
  return (1.0 - theta) * f[i0] + theta * f[i1];
}

}  // namespace

double GridField1D::mass() const {
  double s = 0.0;
  for (double r : rho) s += r;
  return s * dx();
}

void GridField1D::validate() const {
  require(length > 0.0 && std::isfinite(length), "grid length must be positive");
  require(!rho.empty(), "grid needs at least one cell");
  require(w.size() == rho.size(), "rho and w must have the same number of cells");
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!std::isfinite(rho[i]) || !std::isfinite(w[i]))
      fail(ErrorCode::NonFiniteState, "non-finite value in cell " + std::to_string(i));
    require(rho[i] >= 0.0, "density must be nonnegative");
  }
}

void HydroConfig::validate() const {
  kernel.validate();
  require(kernel.dim == 1, "hydro kernel must be one-dimensional");
  require(cfl > 0.0 && cfl <= 1.0, "cfl must lie in (0, 1]");
  require(t_final > 0.0 && std::isfinite(t_final), "t_final must be positive");
  require(std::isfinite(record_every), "record_every must be finite");
  require(max_steps > 0, "max_steps must be positive");
}

std::vector<double> compute_u(const GridField1D& field, const OffsetKernel& k) {
  field.validate();
  require(std::abs(field.length - k.length()) <= 1e-12 * field.length, "kernel and grid lengths differ");
  const auto conv = make_gradient_convolution(k, field.cells());
  std::vector<double> c;
  conv.apply(field.rho, c);
  std::vector<double> u(field.cells());
  for (int i = 0; i < field.cells(); ++i) u[i] = field.w[i] - c[i];
  return u;
}

Solver::Solver(const HydroConfig& cfg, double length, int cells)
    : cfg_(cfg),
      length_(length),
      cells_(cells),
      kernel_(cfg.kernel, length, cfg.window_radius),
      conv_(make_gradient_convolution(kernel_, cells)) {
  cfg.validate();
  require(cells >= 2, "hydro grid needs at least two cells");
}

std::vector<double> Solver::velocity(const GridField1D& field) const {
  std::vector<double> c;
  conv_.apply(field.rho, c);
  for (int i = 0; i < cells_; ++i) c[i] = field.w[i] - c[i];
  return c;
}

double Solver::stable_dt(const GridField1D& field) const {
  const auto u = velocity(field);
  double umax = kMinSpeed;
  for (double z : u) umax = std::max(umax, std::abs(z));
  return cfg_.cfl * (length_ / cells_) / umax;
}

void Solver::rhs(const std::vector<double>& rho, const std::vector<double>& m, const std::vector<double>& w,
                 std::vector<double>& drho, std::vector<double>& dm, std::vector<double>& dw) const {
  (void)m;
  const int n = cells_;
  const double dx = length_ / n;
  std::vector<double> u;
  conv_.apply(rho, u);
  for (int i = 0; i < n; ++i) u[i] = w[i] - u[i];

  std::vector<double> srho(n, 0.0), sw(n, 0.0);
  if (cfg_.limiter == Limiter::Minmod) {
    for (int i = 0; i < n; ++i) {
      const int l = wrap_index(i - 1, n), r = wrap_index(i + 1, n);
      srho[i] = minmod(rho[i] - rho[l], rho[r] - rho[i]);
      sw[i] = minmod(w[i] - w[l], w[r] - w[i]);
    }
  }

  std::vector<double> F(n), G(n);  // flux through the face between i and i+1
  for (int i = 0; i < n; ++i) {
    const int r = wrap_index(i + 1, n);
    const double uf = 0.5 * (u[i] + u[r]);
    double rf, wf;
    if (uf >= 0.0) {
      rf = rho[i] + 0.5 * srho[i];
      wf = w[i] + 0.5 * sw[i];
    } else {
      rf = rho[r] - 0.5 * srho[r];
      wf = w[r] - 0.5 * sw[r];
    }
    F[i] = rf * uf;
    G[i] = F[i] * wf;
  }

  drho.resize(n);
  dm.resize(n);
  dw.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int l = wrap_index(i - 1, n);
    drho[i] = -(F[i] - F[l]) / dx;
    dm[i] = -(G[i] - G[l]) / dx;
    if (rho[i] < kVacuum) {
      // Passive upwind transport of w through empty cells.
      const int r = wrap_index(i + 1, n);
      dw[i] = u[i] >= 0.0 ? -u[i] * (w[i] - w[l]) / dx : -u[i] * (w[r] - w[i]) / dx;
    }
  }
}

void Solver::step(GridField1D& field, double dt) const {
  const int n = cells_;
  require(field.cells() == n, "field does not match the solver grid");
  require(dt > 0.0 && std::isfinite(dt), "step size must be positive");

  std::vector<double> m0(n);
  for (int i = 0; i < n; ++i) m0[i] = field.rho[i] * field.w[i];

  auto recover_w = [&](const std::vector<double>& rho, const std::vector<double>& m, const std::vector<double>& wprev,
                       const std::vector<double>& dwv, double h, std::vector<double>& w) {
    w.resize(n);
    for (int i = 0; i < n; ++i) w[i] = rho[i] >= kVacuum ? m[i] / rho[i] : wprev[i] + h * dwv[i];
  };

  std::vector<double> drho, dm, dw;
  rhs(field.rho, m0, field.w, drho, dm, dw);
  std::vector<double> rho1(n), m1(n), w1;
  for (int i = 0; i < n; ++i) {
    rho1[i] = field.rho[i] + dt * drho[i];
    m1[i] = m0[i] + dt * dm[i];
  }
  recover_w(rho1, m1, field.w, dw, dt, w1);

  std::vector<double> drho1, dm1, dw1;
  rhs(rho1, m1, w1, drho1, dm1, dw1);
  std::vector<double> rho2(n), m2(n), w2;
  for (int i = 0; i < n; ++i) {
    rho2[i] = 0.5 * field.rho[i] + 0.5 * (rho1[i] + dt * drho1[i]);
    m2[i] = 0.5 * m0[i] + 0.5 * (m1[i] + dt * dm1[i]);
  }
  w2.resize(n);
  for (int i = 0; i < n; ++i)
    w2[i] = rho2[i] >= kVacuum ? m2[i] / rho2[i] : 0.5 * field.w[i] + 0.5 * (w1[i] + dt * dw1[i]);

  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(rho2[i]) || !std::isfinite(w2[i]))
      fail(ErrorCode::NonFiniteState, "hydro state became non-finite at t = " + std::to_string(field.t));
    rho2[i] = std::max(rho2[i], 0.0);
  }
  field.rho = std::move(rho2);
  field.w = std::move(w2);
  field.t += dt;
}

std::size_t HydroSolution::frame_at(double t) const {
  require(!frames.empty(), "solution has no frames");
  auto it = std::lower_bound(frames.begin(), frames.end(), t,
                             [](const HydroFrame& f, double tt) { return f.t < tt; });
  if (it == frames.end()) return frames.size() - 1;
  if (it == frames.begin()) return 0;
  const auto prev = it - 1;
  return (t - prev->t) <= (it->t - t) ? static_cast<std::size_t>(prev - frames.begin())
                                      : static_cast<std::size_t>(it - frames.begin());
}

double HydroSolution::rho(double t, double x) const { return interpolate(frames[frame_at(t)].rho, length, x); }
double HydroSolution::u(double t, double x) const { return interpolate(frames[frame_at(t)].u, length, x); }
double HydroSolution::w(double t, double x) const { return interpolate(frames[frame_at(t)].w, length, x); }

GridField1D HydroSolution::field(std::size_t frame) const {
  const HydroFrame& f = frames.at(frame);
  return GridField1D{length, f.rho, f.w, f.t};
}

HydroSolution solve(const GridField1D& initial, const HydroConfig& cfg) {
  initial.validate();
  const Solver solver(cfg, initial.length, initial.cells());
  HydroSolution sol;
  sol.length = initial.length;
  sol.cells = initial.cells();

  GridField1D field = initial;
  field.t = 0.0;
  sol.frames.push_back({0.0, field.rho, field.w, solver.velocity(field)});

  const double T = cfg.t_final;
  const bool every_step = cfg.record_every <= 0.0;
  long next_record = 1;
  auto record_time = [&](long k) { return std::min(T, k * cfg.record_every); };

  while (field.t < T) {
    if (sol.steps >= cfg.max_steps) fail(ErrorCode::InvalidArgument, "hydro run exceeded max_steps");
    const double target = every_step ? T : record_time(next_record);
    double dt = solver.stable_dt(field);
    bool hit = false;
    if (field.t + dt >= target - 1e-12 * T) {
      dt = target - field.t;
      hit = true;
    } else if (field.t + 2.0 * dt > target) {
      dt = 0.5 * (target - field.t);  // avoid a sliver step before the target
    }
    solver.step(field, dt);
    ++sol.steps;
    if (hit) {
      field.t = target;
      ++next_record;
    }
    if (every_step || hit) sol.frames.push_back({field.t, field.rho, field.w, solver.velocity(field)});
  }
  return sol;
}

double l1_coarse_difference(const std::vector<double>& coarse, const std::vector<double>& fine,
                            double dx_coarse) {
  require(fine.size() == 2 * coarse.size(), "fine grid must have twice the cells");
  double s = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) s += std::abs(coarse[i] - 0.5 * (fine[2 * i] + fine[2 * i + 1]));
  return s * dx_coarse;
}

}  // namespace dnar::hydro
