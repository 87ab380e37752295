#include <doctest.h>

#include <cmath>

#include "dnar/meanfield.hpp"
#include "dnar/rng.hpp"
#include "support.hpp"

using namespace dnar;
using namespace dnar::meanfield;

namespace {

particle::Ensemble gaussian(int n, int d, std::uint64_t seed) {
  particle::Ensemble e(d, n);
  particle::sample(e.x, n, d, particle::Layout::Gaussian, 0.0, 1.0, stream_seed(seed, 0));
  particle::sample(e.omega, n, d, particle::Layout::Gaussian, 0.0, 1.0, stream_seed(seed, 1));
  return e;
}

MeanFieldConfig small_study() {
  MeanFieldConfig c;
  c.cells = 256;
  c.t_final = 0.2;
  c.record_every = 0.05;
  c.particle_dt = 0.01;
  c.n_values = {10, 20, 40};
  c.seeds = 3;
  return c;
}

}  // namespace

TEST_CASE("least-squares fits recover exact laws") {
  std::vector<double> x, y, t, d;
  for (int i = 1; i <= 6; ++i) {
    x.push_back(std::pow(2.0, i));
    y.push_back(3.0 * std::pow(x.back(), -0.75));
  }
  CHECK(fit_log_slope(x, y) == doctest::Approx(-0.75).epsilon(1e-12));
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.05 * i);
    d.push_back(2.0 * std::exp(-1.3 * t.back()));
  }
  CHECK(fit_decay_rate(t, d) == doctest::Approx(1.3).epsilon(1e-10));
  d[50] = 0.0;  // nonpositive samples are skipped
  CHECK(fit_decay_rate(t, d) == doctest::Approx(1.3).epsilon(1e-10));
}

TEST_CASE("quadratic oracle agrees with integration") {
  const auto e = gaussian(64, 2, 1);
  particle::IntegratorConfig c;
  c.dt = 1e-3;
  c.t_final = 1.0;
  const auto traj = particle::integrate_dnar(e, kernel::KernelSpec::quadratic(0.7, 2), c);
  const auto x = quadratic_oracle(e, 0.7, 1.0);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - traj.frames.back().x[i]));
  CHECK(err <= 1e-10);
  const auto x0 = quadratic_oracle(e, 0.7, 0.0);
  for (std::size_t i = 0; i < x0.size(); ++i) CHECK(x0[i] == doctest::Approx(e.x[i]).epsilon(1e-14));
}

TEST_CASE("contractivity study on the quadratic kernel") {
  const auto a = gaussian(20, 2, 2);
  auto b = a;
  for (std::size_t i = 0; i < b.x.size(); ++i) b.x[i] += 0.3 * std::sin(double(i));
  particle::remove_mean(b.x, b.count, b.dim);
  auto a0 = a;
  particle::remove_mean(a0.x, a0.count, a0.dim);
  particle::IntegratorConfig c;
  c.dt = 1e-2;
  c.t_final = 5.0;
  const auto rep = contractivity_study(a0, b, kernel::KernelSpec::quadratic(1.0, 2), c);
  CHECK(rep.fitted.at("rate") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.check("monotone")->passed);
  CHECK(rep.check("rate_ge_c0")->passed == (rep.fitted.at("rate") >= 1.0));
  CHECK_FALSE(rep.check("rate_ge_2c0")->passed);
  REQUIRE(rep.find_series("fibered_w2") != nullptr);

  SUBCASE("preconditions") {
    auto shifted = b;
    for (int i = 0; i < shifted.count; ++i) shifted.x[2 * i] += 0.1;
    CHECK(code_of([&] { contractivity_study(a0, shifted, kernel::KernelSpec::quadratic(1.0, 2), c); }) ==
          ErrorCode::CenterMismatch);
    auto other = b;
    other.omega[0] += 1.0;
    CHECK(code_of([&] { contractivity_study(a0, other, kernel::KernelSpec::quadratic(1.0, 2), c); }) ==
          ErrorCode::MarginalMismatch);
  }
}

TEST_CASE("equilibrium study") {
  auto e = gaussian(16, 1, 3);
  particle::IntegratorConfig c;
  c.dt = 1e-2;
  c.t_final = 20.0;
  CHECK(code_of([&] { equilibrium_study(e, kernel::KernelSpec::quadratic(1.0, 1), c); }) ==
        ErrorCode::NonzeroMeanOmega);
  particle::remove_mean(e.omega, e.count, e.dim);
  const auto rep = equilibrium_study(e, kernel::KernelSpec::quadratic(1.0, 1), c);
  CHECK(rep.passed());
  CHECK(rep.fitted.at("final_gap") <= 1e-6);
  CHECK(rep.fitted.at("rate") == doctest::Approx(1.0).epsilon(1e-3));

  const auto ws = equilibrium_study(e, kernel::KernelSpec::weakly_singular(0.5, 1), c);
  CHECK(ws.check("reaches_equilibrium") == nullptr);
  CHECK(ws.check("center_of_mass_fixed")->passed);
}

TEST_CASE("error functional under characteristic initialization") {
  const auto cfg = small_study();
  const auto ref = reference_solution(cfg);
  const auto ens = characteristic_ensemble(ref, 50, 7);
  for (int i = 0; i < ens.count; ++i) {
    CHECK((ens.x[i] >= 0.0 && ens.x[i] < cfg.length));
    CHECK(ens.v[i] == ref.u(0.0, ens.x[i]));
  }
  const hydro::OffsetKernel k(kernel::KernelSpec::smooth_compact(cfg.radius, cfg.amplitude, 1), cfg.length);
  particle::IntegratorConfig ic;
  ic.dt = cfg.particle_dt;
  ic.t_final = cfg.t_final;
  ic.record_every = 5;
  const auto traj = integrate_torus_cs(ens, k, ic);
  const auto s = cc_error_series(traj, ref);
  REQUIRE(s.t.size() == 5);
  CHECK(s.e1.front() == 0.0);
  CHECK(s.e2.front() > 0.0);
  CHECK(s.sup_total() >= s.sup_e2());

  const auto b = cc_bound_check(s, 1e6);
  CHECK_FALSE(b.absolute_mode);
  CHECK(b.c_observed == doctest::Approx(b.max_e / b.e0));
  CHECK(b.within_config);

  particle::IntegratorConfig longer = ic;
  longer.t_final = 0.5;
  const auto too_long = integrate_torus_cs(ens, k, longer);
  CHECK(code_of([&] { cc_error_series(too_long, ref); }) == ErrorCode::DomainMismatch);
}

TEST_CASE("bound check falls back to absolute levels when E(0) vanishes") {
  CCErrorSeries s;
  s.t = {0.0, 1.0};
  s.e1 = {0.0, 1e-3};
  s.e2 = {0.0, 0.0};
  const auto b = cc_bound_check(s, 10.0);
  CHECK(b.absolute_mode);
  CHECK(b.within_config);
  CHECK(b.max_e == 1e-3);
}

TEST_CASE("momentum functional vanishes on an exact quadrature") {
  hydro::HydroFrame f;
  f.rho = std::vector<double>(4, 1.0);
  f.u = std::vector<double>(4, 0.5);
  particle::Ensemble e(1, 4);
  e.x = {0.125, 0.375, 0.625, 0.875};
  e.v = {0.5, 0.5, 0.5, 0.5};
  CHECK(momentum_functional(e, f, 1.0) <= 1e-15);
}

TEST_CASE("convergence study is independent of the worker count") {
  auto cfg = small_study();
  const auto ref = reference_solution(cfg);
  cfg.workers = 1;
  const auto one = convergence_in_N(cfg, ref);
  cfg.workers = 3;
  const auto three = convergence_in_N(cfg, ref);
  REQUIRE(one.runs.size() == 9);
  REQUIRE(three.runs.size() == 9);
  for (std::size_t i = 0; i < one.runs.size(); ++i) {
    CHECK(one.runs[i].count == three.runs[i].count);
    CHECK(one.runs[i].seed == three.runs[i].seed);
    CHECK(one.runs[i].series.e2 == three.runs[i].series.e2);
  }
  CHECK(one.report.fitted == three.report.fitted);
  CHECK(one.report.check("E1_0_exact")->passed);
  CHECK(one.runs[0].seed == stream_seed(cfg.master_seed, 10, 0));
}

TEST_CASE("study config validation") {
  auto cfg = small_study();
  cfg.record_every = 0.013;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
  cfg = small_study();
  cfg.n_values = {10, 5, 20};
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
}
