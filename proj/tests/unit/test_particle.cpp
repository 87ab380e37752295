#include <doctest.h>

#include <cmath>
#include <limits>

#include "dnar/particle.hpp"
#include "support.hpp"

using namespace dnar;
using namespace dnar::particle;

namespace {

Ensemble random_ensemble(int n, int d, std::uint64_t seed, double xs = 1.0, double ws = 0.5) {
  Ensemble e(d, n);
  sample(e.x, n, d, Layout::Gaussian, 0.0, xs, seed);
  sample(e.omega, n, d, Layout::Gaussian, 0.0, ws, seed + 1);
  sample(e.v, n, d, Layout::Gaussian, 0.0, ws, seed + 2);
  return e;
}

// Closed-form DNAR solution for K = (lambda/2)|x|^2, written out here
// independently of the library oracle.
double quadratic_exact(const Ensemble& e, int i, int c, double lambda, double t) {
  double xbar = 0.0, wbar = 0.0;
  for (int j = 0; j < e.count; ++j) {
    xbar += e.x[j * e.dim + c];
    wbar += e.omega[j * e.dim + c];
  }
  xbar /= e.count;
  wbar /= e.count;
  const double dw = e.omega[i * e.dim + c] - wbar;
  const double y0 = e.x[i * e.dim + c] - xbar;
  return xbar + wbar * t + dw / lambda + (y0 - dw / lambda) * std::exp(-lambda * t);
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("step count lands on t_final") {
  IntegratorConfig c;
  c.dt = 0.3;
  c.t_final = 1.0;
  CHECK(c.steps() == 3);
  c.dt = 1e-3;
  CHECK(c.steps() == 1000);
  c.dt = 0.7;
  CHECK(c.steps() == 1);
  const Ensemble e = random_ensemble(3, 1, 1);
  c.dt = 0.3;
  const auto traj = integrate_dnar(e, kernel::KernelSpec::quadratic(1.0, 1), c);
  CHECK(traj.frames.back().t == 1.0);
  CHECK(traj.frames.size() == 4);
}

TEST_CASE("record_every thins frames but keeps the final time") {
  IntegratorConfig c;
  c.dt = 0.1;
  c.t_final = 1.0;
  c.record_every = 3;
  const auto traj = integrate_dnar(random_ensemble(4, 2, 3), kernel::KernelSpec::quadratic(1.0, 2), c);
  std::vector<double> times;
  for (const auto& f : traj.frames) times.push_back(f.t);
  REQUIRE(times.size() == 5);
  CHECK(times[1] == doctest::Approx(0.3));
  CHECK(times.back() == 1.0);
}

TEST_CASE("dnar velocity: pairwise antisymmetry preserves the mean") {
  for (const auto& k : {kernel::KernelSpec::quadratic(2.0, 2), kernel::KernelSpec::weakly_singular(0.4, 2),
                        kernel::KernelSpec::smooth_compact(0.8, 1.0, 2)}) {
    const Ensemble e = random_ensemble(12, 2, 7);
    const auto v = dnar_velocity(e, k);
    for (int c = 0; c < 2; ++c) {
      double sv = 0.0, sw = 0.0;
      for (int i = 0; i < e.count; ++i) {
        sv += v[i * 2 + c];
        sw += e.omega[i * 2 + c];
      }
      CHECK(sv == doctest::Approx(sw).epsilon(1e-12));
    }
  }
}

TEST_CASE("quadratic DNAR matches the closed form") {
  const Ensemble e = random_ensemble(10, 2, 5);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.t_final = 2.0;
  c.record_every = 500;
  const auto traj = integrate_dnar(e, kernel::KernelSpec::quadratic(1.5, 2), c);
  double err = 0.0;
  for (const auto& f : traj.frames)
    for (int i = 0; i < e.count; ++i)
      for (int k = 0; k < 2; ++k) err = std::max(err, std::abs(f.x[i * 2 + k] - quadratic_exact(e, i, k, 1.5, f.t)));
  CHECK(err <= 1e-10);
  for (const auto& f : traj.frames) CHECK(f.omega == e.omega);
}

TEST_CASE("integrator orders") {
  const Ensemble e = random_ensemble(8, 2, 9, 0.5);
  const auto k = kernel::KernelSpec::smooth_compact(1.0, 1.0, 2);
  IntegratorConfig ref;
  ref.dt = 1e-3;
  const auto x_ref = integrate_dnar(e, k, ref).frames.back().x;

  auto error = [&](Scheme s, double dt) {
    IntegratorConfig c;
    c.scheme = s;
    c.dt = dt;
    return max_diff(integrate_dnar(e, k, c).frames.back().x, x_ref);
  };
  const double rk_ratio = error(Scheme::RK4, 0.1) / error(Scheme::RK4, 0.05);
  const double eu_ratio = error(Scheme::ForwardEuler, 0.01) / error(Scheme::ForwardEuler, 0.005);
  CHECK(rk_ratio == doctest::Approx(16.0).epsilon(0.15));
  CHECK(eu_ratio == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("alignment system dissipates energy and conserves momentum") {
  for (const auto& psi : {kernel::MatrixWeightSpec::scalar_bump(1.5, 1.0, 2),
                          kernel::MatrixWeightSpec::from_kernel(kernel::KernelSpec::quadratic(1.0, 2)),
                          kernel::MatrixWeightSpec::from_kernel(kernel::KernelSpec::smooth_compact(1.0, 1.0, 2))}) {
    const Ensemble e = random_ensemble(16, 2, 21);
    IntegratorConfig c;
    c.dt = 1e-2;
    c.t_final = 3.0;
    const auto d = diagnostics(integrate_cs(e, psi, c));
    INFO(psi.name());
    for (std::size_t i = 1; i < d.t.size(); ++i) CHECK(d.kinetic_energy[i] <= d.kinetic_energy[i - 1] + 1e-12);
    for (std::size_t i = 0; i < d.t.size(); ++i)
      for (int c2 = 0; c2 < 2; ++c2) CHECK(std::abs(d.momentum[i][c2] - d.momentum[0][c2]) <= 1e-12);
  }
}

TEST_CASE("DNAR and alignment trajectories coincide for Psi = Hess K") {
  const Ensemble e = random_ensemble(8, 2, 33, 0.6);
  IntegratorConfig c;
  c.dt = 1e-2;
  for (const auto& k : {kernel::KernelSpec::quadratic(1.0, 2), kernel::KernelSpec::smooth_compact(1.0, 1.0, 2)}) {
    const auto rep = equivalence_check(e, k, c);
    CHECK(rep.max_gap() <= 1e-7);
  }
}

TEST_CASE("diagnostics on a hand-built trajectory") {
  Trajectory t{1, 2, {}};
  t.frames.push_back(Frame{0.0, {0.0, 3.0}, {1.0, -3.0}, {0.0, 0.0}});
  const auto d = diagnostics(t);
  CHECK(d.kinetic_energy[0] == doctest::Approx((1.0 + 9.0) / 4.0));
  CHECK(d.momentum[0][0] == doctest::Approx(-1.0));
  CHECK(d.velocity_diameter[0] == doctest::Approx(4.0));
  CHECK(d.position_diameter[0] == doctest::Approx(3.0));
  CHECK(d.center_of_mass[0][0] == doctest::Approx(1.5));
}

TEST_CASE("sampling is reproducible and layouts respect their box") {
  std::vector<double> a, b;
  sample(a, 50, 3, Layout::Gaussian, 1.0, 2.0, 42);
  sample(b, 50, 3, Layout::Gaussian, 1.0, 2.0, 42);
  CHECK(a == b);
  sample(b, 50, 3, Layout::Gaussian, 1.0, 2.0, 43);
  CHECK(a != b);
  sample(a, 200, 2, Layout::UniformBox, -1.0, 0.5, 1);
  for (double z : a) CHECK((z >= -1.5 && z <= -0.5));
  sample(a, 9, 2, Layout::Lattice, 0.0, 1.0, 0);
  CHECK(a[0] == doctest::Approx(-2.0 / 3.0));
  CHECK(a[16] == doctest::Approx(2.0 / 3.0));
  remove_mean(a, 9, 2);
  double s = 0.0;
  for (int i = 0; i < 9; ++i) s += a[2 * i];
  CHECK(std::abs(s) <= 1e-15);
}

TEST_CASE("invalid ensembles and configs are rejected") {
  Ensemble e = random_ensemble(4, 2, 1);
  e.x[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { e.validate(); }) == ErrorCode::NonFiniteState);
  IntegratorConfig c;
  c.dt = 2.0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
  const Ensemble ok = random_ensemble(4, 2, 1);
  CHECK(code_of([&] { dnar_velocity(ok, kernel::KernelSpec::quadratic(1.0, 3)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("weakly singular alignment surfaces the singular evaluation") {
  Ensemble e(1, 2);
  e.x = {0.5, 0.5};
  IntegratorConfig c;
  CHECK(code_of([&] {
          integrate_cs(e, kernel::MatrixWeightSpec::from_kernel(kernel::KernelSpec::weakly_singular(0.5, 1)), c);
        }) == ErrorCode::SingularEvaluation);
}
