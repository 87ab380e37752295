#include <algorithm>
#include <cmath>

#include "dnar/error.hpp"
#include "dnar/hydro1d.hpp"

namespace dnar::hydro {

namespace {

std::vector<double> centered_diff(const std::vector<double>& f, double dx) {
  const int n = static_cast<int>(f.size());
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * dx);
  return d;
}

double signed_periodic(double x, double length) {
  double y = std::fmod(x, length);
  if (y > 0.5 * length) y -= length;
  if (y < -0.5 * length) y += length;
  return y;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double z : v) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

double EMonitor::max_abs_integral() const { return max_of(integral); }
double EMonitor::max_identity_gap() const { return max_of(identity_gap); }
double EMonitor::max_residual() const { return max_of(residual); }

EMonitor e_monitor(const HydroSolution& sol, const OffsetKernel* psi) {
  require(!sol.frames.empty(), "e_monitor needs at least one frame");
  const double dx = sol.dx();
  const int n = sol.cells;
  EMonitor out;
  std::optional<PeriodicConvolution> wconv;
  double psi_mass = 0.0;
  if (psi) {
    wconv.emplace(make_weight_convolution(*psi, n));
    std::vector<double> ones(n, 1.0), tmp;
    wconv->apply(ones, tmp);
    psi_mass = tmp[0];
  }

  std::vector<std::vector<double>> e(sol.frames.size());
  for (std::size_t k = 0; k < sol.frames.size(); ++k) {
    const HydroFrame& f = sol.frames[k];
    e[k] = centered_diff(f.w, dx);
    double integral = 0.0;
    for (double z : e[k]) integral += z * dx;
    out.t.push_back(f.t);
    out.integral.push_back(integral);
    if (psi) {
      const auto du = centered_diff(f.u, dx);
      std::vector<double> conv;
      wconv->apply(f.rho, conv);
      double gap = 0.0;
      for (int i = 0; i < n; ++i) gap = std::max(gap, std::abs(e[k][i] - (du[i] + conv[i] - psi_mass * f.rho[i])));
      out.identity_gap.push_back(gap);
    }
  }

  for (std::size_t k = 0; k + 1 < sol.frames.size(); ++k) {
    const double dt = sol.frames[k + 1].t - sol.frames[k].t;
    if (dt <= 0.0) continue;
    std::vector<double> ue0(n), ue1(n);
    for (int i = 0; i < n; ++i) {
      ue0[i] = sol.frames[k].u[i] * e[k][i];
      ue1[i] = sol.frames[k + 1].u[i] * e[k + 1][i];
    }
    const auto d0 = centered_diff(ue0, dx);
    const auto d1 = centered_diff(ue1, dx);
    double r = 0.0;
    for (int i = 0; i < n; ++i) r += std::abs((e[k + 1][i] - e[k][i]) / dt + 0.5 * (d0[i] + d1[i])) * dx;
    out.residual.push_back(r);
  }
  return out;
}

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q;
}

double bump_derivative(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -6.0 * s * q * q;
}

std::vector<TestFunction> residual_test_family(const HydroSolution& sol) {
  require(!sol.frames.empty(), "residual family needs a solution");
  const double T = sol.frames.back().t;
  const double L = sol.length;
  const auto& w0 = sol.frames.front().w;
  const auto [lo, hi] = std::minmax_element(w0.begin(), w0.end());
  const double range = *hi - *lo;
  const double wh = 0.75 * std::max(range, 1e-3);
  const double tc[3] = {0.0, 0.25 * T, 0.5 * T};
  const double xc[3] = {L / 6.0, L / 2.0, 5.0 * L / 6.0};
  const double wc[3] = {*lo, 0.5 * (*lo + *hi), *hi};
  std::vector<TestFunction> fam;
  for (double a : tc)
    for (double b : xc)
      for (double c : wc) fam.push_back({a, 0.4 * T, b, 0.25 * L, c, wh});
  return fam;
}

double kinetic_residual(const HydroSolution& sol, const std::vector<TestFunction>& family) {
  require(!sol.frames.empty(), "kinetic_residual needs a solution");
  const double dx = sol.dx();
  const int n = sol.cells;
  const double mass = sol.field(0).mass();
  require(mass > 0.0, "kinetic_residual needs positive mass");

  double worst = 0.0;
  for (const TestFunction& eta : family) {
    // Spatial integrand of the time integral at frame k.
    auto integrand = [&](const HydroFrame& f) {
      const double st = (f.t - eta.t_center) / eta.t_half;
      const double bt = bump(st), dbt = bump_derivative(st) / eta.t_half;
      if (bt == 0.0 && dbt == 0.0) return 0.0;
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        if (f.rho[i] == 0.0) continue;
        const double sx = signed_periodic((i + 0.5) * dx - eta.x_center, sol.length) / eta.x_half;
        const double bx = bump(sx);
        const double dbx = bump_derivative(sx) / eta.x_half;
        if (bx == 0.0 && dbx == 0.0) continue;
        const double bw = bump((f.w[i] - eta.w_center) / eta.w_half);
        s += f.rho[i] * bw * (dbt * bx + f.u[i] * bt * dbx);
      }
      return s * dx / mass;
    };

    const HydroFrame& f0 = sol.frames.front();
    double boundary = 0.0;
    const double bt0 = bump((f0.t - eta.t_center) / eta.t_half);
    for (int i = 0; i < n; ++i) {
      const double sx = signed_periodic((i + 0.5) * dx - eta.x_center, sol.length) / eta.x_half;
      boundary += f0.rho[i] * bt0 * bump(sx) * bump((f0.w[i] - eta.w_center) / eta.w_half);
    }
    boundary *= dx / mass;

    double integral = 0.0;
    double prev = integrand(sol.frames.front());
    for (std::size_t k = 1; k < sol.frames.size(); ++k) {
      const double cur = integrand(sol.frames[k]);
      integral += 0.5 * (prev + cur) * (sol.frames[k].t - sol.frames[k - 1].t);
      prev = cur;
    }
    worst = std::max(worst, std::abs(boundary + integral));
  }
  return worst;
}

double kinetic_residual(const HydroSolution& sol) { return kinetic_residual(sol, residual_test_family(sol)); }

double eam_residual(const HydroSolution& sol, const OffsetKernel& psi_source) {
  require(sol.frames.size() >= 2, "eam_residual needs at least two frames");
  const double dx = sol.dx();
  const int n = sol.cells;
  const auto conv = make_weight_convolution(psi_source, n);

  auto terms = [&](const HydroFrame& f, std::vector<double>& p, std::vector<double>& rest) {
    p.resize(n);
    std::vector<double> flux(n);
    for (int i = 0; i < n; ++i) {
      p[i] = f.rho[i] * f.u[i];
      flux[i] = p[i] * f.u[i];
    }
    std::vector<double> cp, cr;
    conv.apply(p, cp);
    conv.apply(f.rho, cr);
    const auto dflux = centered_diff(flux, dx);
    rest.resize(n);
    for (int i = 0; i < n; ++i) rest[i] = dflux[i] - f.rho[i] * (cp[i] - f.u[i] * cr[i]);
  };

  std::vector<double> p0, r0, p1, r1;
  terms(sol.frames.front(), p0, r0);
  double acc = 0.0, span = 0.0;
  for (std::size_t k = 1; k < sol.frames.size(); ++k) {
    terms(sol.frames[k], p1, r1);
    const double dt = sol.frames[k].t - sol.frames[k - 1].t;
    if (dt > 0.0) {
      double r = 0.0;
      for (int i = 0; i < n; ++i) r += std::abs((p1[i] - p0[i]) / dt + 0.5 * (r0[i] + r1[i])) * dx;
      acc += r * dt;
      span += dt;
    }
    std::swap(p0, p1);
    std::swap(r0, r1);
  }
  return span > 0.0 ? acc / span : 0.0;
}

}  // namespace dnar::hydro
