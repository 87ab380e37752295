#include "dnar/meanfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <mutex>
#include <random>
#include <thread>

#include "dnar/error.hpp"
#include "dnar/rng.hpp"
#include "dnar/transport.hpp"

namespace dnar::meanfield {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double wrap01(double x, double length) {
  double y = std::fmod(x, length);
  if (y < 0.0) y += length;
  if (y >= length) y -= length;
  return y;
}

}  // namespace

std::vector<double> CCErrorSeries::total() const {
  std::vector<double> e(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) e[k] = e1[k] + e2[k];
  return e;
}

double CCErrorSeries::sup_total() const {
  const auto e = total();
  return e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
}

double CCErrorSeries::sup_e2() const { return e2.empty() ? 0.0 : *std::max_element(e2.begin(), e2.end()); }

CCErrorSeries cc_error_series(const particle::Trajectory& traj, const hydro::HydroSolution& ref) {
  require(traj.count >= 1, "error series needs N >= 1");
  require(!traj.frames.empty() && !ref.frames.empty(), "error series needs recorded frames");
  if (traj.dim != 1) fail(ErrorCode::DomainMismatch, "the reference domain is the 1D torus");
  const double L = ref.length;
  const double t_end = ref.frames.back().t;

  CCErrorSeries out;
  out.count = traj.count;
  const double inv_n = 1.0 / traj.count;
  for (const particle::Frame& f : traj.frames) {
    if (f.t > t_end * (1.0 + 1e-12) + 1e-12)
      fail(ErrorCode::DomainMismatch, "particle time " + std::to_string(f.t) + " lies beyond the reference");
    const std::size_t k = ref.frame_at(f.t);
    const hydro::HydroFrame& rf = ref.frames[k];
    if (std::abs(rf.t - f.t) > 1e-9 * std::max(1.0, f.t))
      fail(ErrorCode::DomainMismatch, "no reference frame recorded at t = " + std::to_string(f.t));

    double e1 = 0.0;
    std::vector<double> pts(traj.count);
    for (int i = 0; i < traj.count; ++i) {
      if (!std::isfinite(f.x[i])) fail(ErrorCode::DomainMismatch, "particle left the reference domain");
      const double diff = ref.u(f.t, f.x[i]) - f.v[i];
      e1 += diff * diff;
      pts[i] = wrap01(f.x[i], L);
    }
    const auto emp = transport::DiscreteMeasure::uniform(1, std::move(pts));
    const auto cont = transport::grid_to_measure(ref.field(k));
    const double d = transport::dbl(emp, cont);
    out.t.push_back(f.t);
    out.e1.push_back(e1 * inv_n);
    out.e2.push_back(d * d);
  }
  return out;
}

CCBound cc_bound_check(const CCErrorSeries& series, double c_config, double eps) {
  require(!series.t.empty(), "bound check needs a nonempty series");
  const auto e = series.total();
  CCBound b;
  b.e0 = e.front();
  b.max_e = *std::max_element(e.begin(), e.end());
  b.absolute_mode = b.e0 < eps;
  b.c_observed = b.max_e / std::max(b.e0, eps);
  b.within_config = b.absolute_mode || b.max_e <= c_config * b.e0;
  return b;
}

double momentum_functional(const particle::Ensemble& ens, const hydro::HydroFrame& ref, double length) {
  require(ens.count >= 1, "momentum functional needs N >= 1");
  require(ens.dim == 1, "momentum functional is one-dimensional");
  const double k = 2.0 * std::numbers::pi / length;
  auto phi = [k](int which, double x) {
    return which == 0 ? 1.0 : which == 1 ? std::cos(k * x) : std::sin(k * x);
  };
  const int m = static_cast<int>(ref.rho.size());
  const double dx = length / m;
  double worst = 0.0;
  for (int which = 0; which < 3; ++which) {
    double particles = 0.0;
    for (int i = 0; i < ens.count; ++i) particles += phi(which, ens.x[i]) * ens.v[i];
    particles /= ens.count;
    double field = 0.0;
    for (int i = 0; i < m; ++i) field += phi(which, (i + 0.5) * dx) * ref.u[i] * ref.rho[i];
    field *= dx;
    worst = std::max(worst, std::abs(particles - field));
  }
  return worst;
}

void MeanFieldConfig::validate() const {
  require(length > 0.0, "study length must be positive");
  require(radius > 0.0 && amplitude > 0.0, "weight radius and amplitude must be positive");
  require(std::abs(rho_amplitude) < 1.0, "density modulation must keep rho > 0");
  require(cells >= 8, "reference needs at least 8 cells");
  require(t_final > 0.0 && record_every > 0.0 && particle_dt > 0.0, "study times must be positive");
  const double ratio = record_every / particle_dt;
  require(std::abs(ratio - std::round(ratio)) < 1e-9, "record_every must be a multiple of particle_dt");
  require(n_values.size() >= 3, "convergence study needs at least three N values");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    require(n_values[i] >= 1, "N values must be >= 1");
    if (i) require(n_values[i] > n_values[i - 1], "N values must increase");
  }
  require(seeds >= 1, "need at least one seed");
  require(workers >= 1, "need at least one worker");
}

hydro::GridField1D initial_field(const MeanFieldConfig& cfg) {
  hydro::GridField1D f;
  f.length = cfg.length;
  f.rho.resize(cfg.cells);
  f.w.resize(cfg.cells);
  const double k = 2.0 * std::numbers::pi / cfg.length;
  for (int i = 0; i < cfg.cells; ++i) {
    const double x = f.center(i);
    f.rho[i] = (1.0 + cfg.rho_amplitude * std::cos(k * x)) / cfg.length;
    f.w[i] = cfg.w_amplitude * std::sin(k * x);
  }
  return f;
}

hydro::HydroSolution reference_solution(const MeanFieldConfig& cfg) {
  cfg.validate();
  hydro::HydroConfig h;
  h.kernel = kernel::KernelSpec::smooth_compact(cfg.radius, cfg.amplitude, 1);
  h.cfl = cfg.cfl;
  h.t_final = cfg.t_final;
  h.record_every = cfg.record_every;
  return hydro::solve(initial_field(cfg), h);
}

particle::Ensemble characteristic_ensemble(const hydro::HydroSolution& ref, int count, std::uint64_t seed) {
  require(count >= 1, "ensemble needs N >= 1");
  const hydro::HydroFrame& f0 = ref.frames.front();
  const int m = ref.cells;
  const double dx = ref.dx();
  std::vector<double> cdf(m + 1, 0.0);
  for (int i = 0; i < m; ++i) cdf[i + 1] = cdf[i] + f0.rho[i] * dx;
  const double total = cdf[m];
  require(total > 0.0, "reference density has no mass");

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  particle::Ensemble ens(1, count);
  for (int n = 0; n < count; ++n) {
    const double target = unif(gen) * total;
    int i = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin()) - 1;
    i = std::clamp(i, 0, m - 1);
    while (f0.rho[i] <= 0.0 && i + 1 < m) ++i;
    const double frac = std::clamp((target - cdf[i]) / (f0.rho[i] * dx), 0.0, 1.0);
    ens.x[n] = std::min((i + frac) * dx, ref.length * (1.0 - 1e-16));
    ens.v[n] = ref.u(0.0, ens.x[n]);
  }
  return ens;
}

particle::Trajectory integrate_torus_cs(const particle::Ensemble& ens0, const hydro::OffsetKernel& k,
                                        const particle::IntegratorConfig& cfg) {
  require(ens0.dim == 1, "torus alignment system is one-dimensional");
  const int n = ens0.count;
  const double inv_n = 1.0 / n;
  return particle::integrate_second_order(
      ens0,
      [&](std::span<const double> x, std::span<const double> v, std::span<double> a) {
        std::fill(a.begin(), a.end(), 0.0);
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) {
            const double psi = k.weight(x[i] - x[j]);
            const double dv = v[j] - v[i];
            a[i] += psi * dv;
            a[j] -= psi * dv;
          }
        for (double& z : a) z *= inv_n;
      },
      cfg);
}

ConvergenceResult convergence_in_N(const MeanFieldConfig& cfg) {
  cfg.validate();
  return convergence_in_N(cfg, reference_solution(cfg));
}

ConvergenceResult convergence_in_N(const MeanFieldConfig& cfg, const hydro::HydroSolution& ref) {
  cfg.validate();
  const hydro::OffsetKernel weight(kernel::KernelSpec::smooth_compact(cfg.radius, cfg.amplitude, 1), cfg.length);
  particle::IntegratorConfig icfg;
  icfg.scheme = particle::Scheme::RK4;
  icfg.dt = cfg.particle_dt;
  icfg.t_final = cfg.t_final;
  icfg.record_every = static_cast<int>(std::lround(cfg.record_every / cfg.particle_dt));

  const std::size_t nn = cfg.n_values.size();
  const std::size_t ns = static_cast<std::size_t>(cfg.seeds);
  ConvergenceResult result;
  result.runs.resize(nn * ns);

  auto run_one = [&](std::size_t idx) {
    const std::size_t a = idx / ns, s = idx % ns;
    const int count = cfg.n_values[a];
    const std::uint64_t seed = stream_seed(cfg.master_seed, static_cast<std::uint64_t>(count), s);
    const auto ens = characteristic_ensemble(ref, count, seed);
    const auto traj = integrate_torus_cs(ens, weight, icfg);
    ConvergenceRun run;
    run.count = count;
    run.seed = seed;
    run.series = cc_error_series(traj, ref);
    run.series.seed = seed;
    run.bound = cc_bound_check(run.series, cfg.c_config);
    for (std::size_t f = 0; f < traj.frames.size(); ++f) {
      const auto& rf = ref.frames[ref.frame_at(traj.frames[f].t)];
      run.momentum_sup = std::max(run.momentum_sup, momentum_functional(traj.ensemble_at(f), rf, ref.length));
    }
    result.runs[idx] = std::move(run);
  };

  // Largest runs first so the tail of the schedule is short.
  std::vector<std::size_t> order(nn * ns);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= order.size()) return;
      try {
        run_one(order[k]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned nw = std::min<unsigned>(cfg.workers, static_cast<unsigned>(order.size()));
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  StudyReport& rep = result.report;
  rep.kind = "convergence_in_N";
  rep.parameters = {{"length", cfg.length},     {"radius", cfg.radius},       {"amplitude", cfg.amplitude},
                    {"cells", double(cfg.cells)}, {"t_final", cfg.t_final},   {"particle_dt", cfg.particle_dt},
                    {"seeds", double(cfg.seeds)}, {"master_seed", double(cfg.master_seed)}};
  Series sup_e{"median_sup_E", {}, {}}, sup_e2{"median_sup_E2", {}, {}}, e2_0{"median_E2_0", {}, {}},
      mom{"median_momentum_functional", {}, {}}, amp{"median_amplification", {}, {}};
  double max_e1_0 = 0.0;
  for (std::size_t a = 0; a < nn; ++a) {
    std::vector<double> se, se2, s0, sm, sa;
    for (std::size_t s = 0; s < ns; ++s) {
      const ConvergenceRun& r = result.runs[a * ns + s];
      se.push_back(r.series.sup_total());
      se2.push_back(r.series.sup_e2());
      s0.push_back(r.series.e2.front());
      sm.push_back(r.momentum_sup);
      sa.push_back(r.bound.c_observed);
      max_e1_0 = std::max(max_e1_0, r.series.e1.front());
    }
    const double nval = cfg.n_values[a];
    for (Series* sr : {&sup_e, &sup_e2, &e2_0, &mom, &amp}) sr->x.push_back(nval);
    sup_e.y.push_back(median(se));
    sup_e2.y.push_back(median(se2));
    e2_0.y.push_back(median(s0));
    mom.y.push_back(median(sm));
    amp.y.push_back(median(sa));
  }
  rep.fitted["slope_sup_E"] = fit_log_slope(sup_e.x, sup_e.y);
  rep.fitted["slope_sup_E2"] = fit_log_slope(sup_e2.x, sup_e2.y);
  rep.fitted["slope_E2_0"] = fit_log_slope(e2_0.x, e2_0.y);
  rep.fitted["slope_momentum_functional"] = fit_log_slope(mom.x, mom.y);
  rep.fitted["max_E1_0"] = max_e1_0;
  rep.fitted["max_median_amplification"] = *std::max_element(amp.y.begin(), amp.y.end());

  bool monotone = true;
  for (std::size_t a = 1; a < nn; ++a) monotone = monotone && sup_e.y[a] <= sup_e.y[a - 1];
  rep.checks.push_back({"median_sup_E_nonincreasing", monotone, monotone ? 1.0 : 0.0, 1.0, ""});
  rep.checks.push_back(
      {"slope_sup_E2", rep.fitted["slope_sup_E2"] <= -0.5, rep.fitted["slope_sup_E2"], -0.5, "fitted slope <= -0.5"});
  rep.checks.push_back({"E1_0_exact", max_e1_0 == 0.0, max_e1_0, 0.0, "characteristic initialisation"});
  rep.series = {sup_e, sup_e2, e2_0, mom, amp};
  return result;
}

}  // namespace dnar::meanfield
