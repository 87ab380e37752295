#pragma once

// Study harnesses: particle-vs-continuum error functional, convergence in N,
// fibered W2 contractivity and convergence to equilibrium.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dnar/hydro1d.hpp"
#include "dnar/kernel.hpp"
#include "dnar/particle.hpp"

namespace dnar::meanfield {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct StudyReport {
  std::string kind;
  std::map<std::string, double> parameters;
  std::map<std::string, double> fitted;
  std::vector<Series> series;  // raw data behind every fitted value
  std::vector<Check> checks;

  bool passed() const;
  const Check* check(const std::string& name) const;
  const Series* find_series(const std::string& name) const;
};

/// Least-squares slope of log y against log x (pairs with y <= 0 skipped).
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Decay rate -d/dt log d(t) by least squares, dropping the first and last 5%
/// of samples and any nonpositive values.
double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& d);

struct CCErrorSeries {
  int count = 0;
  std::uint64_t seed = 0;
  std::vector<double> t;
  std::vector<double> e1;  // (1/N) sum |u(x_i) - v_i|^2
  std::vector<double> e2;  // dbl(empirical, reference)^2

  std::vector<double> total() const;
  double sup_total() const;
  double sup_e2() const;
};

/// Evaluates the error functional at every recorded particle frame against the
/// reference frame recorded at (nearest to) the same time. One-dimensional
/// torus: positions are wrapped into [0, L). Throws DomainMismatch when the
/// trajectory is not 1D or outlives the reference.
CCErrorSeries cc_error_series(const particle::Trajectory& traj, const hydro::HydroSolution& ref);

struct CCBound {
  bool absolute_mode = false;  // E(0) below eps: levels reported instead of a ratio
  double e0 = 0.0;
  double max_e = 0.0;
  double c_observed = 0.0;
  bool within_config = true;
};

CCBound cc_bound_check(const CCErrorSeries& series, double c_config, double eps = 1e-14);

/// max over phi in {1, cos, sin}(2 pi x / L) of |(1/N) sum phi(x_i) v_i - int phi u rho dx|.
double momentum_functional(const particle::Ensemble& ens, const hydro::HydroFrame& ref, double length);

struct MeanFieldConfig {
  double length = 1.0;
  double radius = 0.25;
  double amplitude = 1.0;
  double rho_amplitude = 0.5;  // rho0 = (1 + a cos(2 pi x / L)) / L
  double w_amplitude = 0.05;   // w0 = b sin(2 pi x / L); keep 2 pi b T < 1 so no shock forms
  int cells = 4096;
  double cfl = 0.4;
  double t_final = 1.0;
  double record_every = 0.05;
  double particle_dt = 5e-3;
  std::vector<int> n_values{50, 100, 200, 400, 800};
  int seeds = 8;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  double c_config = 1e6;

  void validate() const;
};

/// Initial field sampled at cell centres.
hydro::GridField1D initial_field(const MeanFieldConfig& cfg);
hydro::HydroSolution reference_solution(const MeanFieldConfig& cfg);

/// Positions drawn i.i.d. from the piecewise-constant reference density,
/// velocities v_i = u(0, x_i) from the reference interpolant.
particle::Ensemble characteristic_ensemble(const hydro::HydroSolution& ref, int count, std::uint64_t seed);

/// Alignment particle system on the torus with the scalar weight of `k`.
particle::Trajectory integrate_torus_cs(const particle::Ensemble& ens0, const hydro::OffsetKernel& k,
                                        const particle::IntegratorConfig& cfg);

struct ConvergenceRun {
  int count = 0;
  std::uint64_t seed = 0;
  CCErrorSeries series;
  CCBound bound;
  double momentum_sup = 0.0;
};

struct ConvergenceResult {
  StudyReport report;
  std::vector<ConvergenceRun> runs;
};

/// Runs every (N, seed) pair against one shared reference, on `workers`
/// threads. Seeds are stream_seed(master, N, s) so results do not depend on
/// the worker count.
ConvergenceResult convergence_in_N(const MeanFieldConfig& cfg);
ConvergenceResult convergence_in_N(const MeanFieldConfig& cfg, const hydro::HydroSolution& ref);

/// x_i(t) for DNAR with K = (lambda/2)|x|^2.
std::vector<double> quadratic_oracle(const particle::Ensemble& ens0, double lambda, double t);

/// Twin-ensemble fibered W2 decay. Throws MarginalMismatch unless omega lists
/// agree and CenterMismatch unless position means agree within 1e-12.
StudyReport contractivity_study(const particle::Ensemble& a, const particle::Ensemble& b,
                                const kernel::KernelSpec& k, const particle::IntegratorConfig& cfg);

/// Throws NonzeroMeanOmega unless mean omega vanishes within 1e-12.
StudyReport equilibrium_study(const particle::Ensemble& ens, const kernel::KernelSpec& k,
                              const particle::IntegratorConfig& cfg);

}  // namespace dnar::meanfield
