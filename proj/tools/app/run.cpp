#include "run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "dnar/error.hpp"
#include "dnar/rng.hpp"

namespace dnar::app {

using nlohmann::json;

namespace {

particle::Layout layout_of(const std::string& s) {
  if (s == "uniform_box") return particle::Layout::UniformBox;
  if (s == "lattice") return particle::Layout::Lattice;
  return particle::Layout::Gaussian;
}

particle::Ensemble sample_ensemble(const RunConfig& cfg, int dim) {
  const auto& p = cfg.particles;
  particle::Ensemble e(dim, p.count);
  particle::sample(e.x, p.count, dim, layout_of(p.layout), p.center, p.scale, stream_seed(cfg.seed, 0));
  particle::sample(e.omega, p.count, dim, layout_of(p.omega_layout), 0.0, p.omega_scale, stream_seed(cfg.seed, 1));
  if (p.zero_mean_omega) particle::remove_mean(e.omega, p.count, dim);
  particle::sample(e.v, p.count, dim, layout_of(p.velocity_layout), 0.0, p.velocity_scale, stream_seed(cfg.seed, 2));
  return e;
}

json certificate_json(const transport::Certificate& c) {
  return {{"method", c.method},
          {"available", c.available},
          {"primal", c.primal},
          {"dual", c.dual},
          {"gap", c.gap()},
          {"max_dual_violation", c.max_dual_violation}};
}

json distances(const transport::DiscreteMeasure& a, const transport::DiscreteMeasure& b) {
  json j;
  const auto r2 = transport::w2(a, b);
  const auto r1 = transport::w1(a, b);
  const auto rb = transport::w1(a, b, 2.0);
  j["w2"] = {{"value", r2.distance}, {"squared", r2.squared}, {"certificate", certificate_json(r2.transport.certificate)}};
  j["w1"] = {{"value", r1.distance}, {"certificate", certificate_json(r1.transport.certificate)}};
  j["dbl"] = {{"value", rb.distance}, {"certificate", certificate_json(rb.transport.certificate)}};
  const auto ua = transport::merge_duplicates(a), ub = transport::merge_duplicates(b);
  if (ua.size() + ub.size() <= transport::kMaxDblLpAtoms) j["dbl"]["lp_cross_check"] = transport::dbl_lp(a, b);
  return j;
}

transport::DiscreteMeasure as_flat(const AnyMeasure& m) {
  if (const auto* d = std::get_if<transport::DiscreteMeasure>(&m)) return *d;
  return std::get<transport::FiberedMeasure>(m).flatten();
}

std::string run_file_name(int count, std::size_t s) {
  return "runs/N" + std::to_string(count) + "_seed" + std::to_string(s) + ".csv";
}

double max_abs_diff_from_first(const std::vector<std::vector<double>>& rows) {
  double m = 0.0;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) m = std::max(m, std::abs(r[c] - rows.front()[c]));
  return m;
}

void run_kernel_check(const RunConfig& cfg, OutputDir& out) {
  json reports = json::array();
  auto add = [&](const kernel::ValidationReport& r) {
    json j = {{"kernel", r.kernel},
              {"samples", r.samples},
              {"symmetry_error", r.symmetry_error},
              {"min_eigenvalue", r.min_eigenvalue},
              {"excluded_samples", r.excluded_samples},
              {"passed", r.passed()}};
    j["gradient_fd_error"] = r.gradient_fd_error ? json(*r.gradient_fd_error) : json(nullptr);
    j["hessian_fd_error"] = r.hessian_fd_error ? json(*r.hessian_fd_error) : json(nullptr);
    reports.push_back(j);
  };
  const int n = cfg.study.samples;
  if (cfg.kernel.type != "scalar_bump") add(kernel::check_kernel(kernel_spec(cfg.kernel), n, cfg.seed));
  add(kernel::check_kernel(weight_spec(cfg), n, cfg.seed));
  bool all = true;
  for (const auto& r : reports) all = all && r["passed"].get<bool>();
  out.write_json("kernel_check.json", {{"reports", reports}, {"passed", all}});
}

void run_particles_dnar(const RunConfig& cfg, OutputDir& out) {
  const auto k = kernel_spec(cfg.kernel);
  const auto ens = sample_ensemble(cfg, k.dim);
  const auto traj = particle::integrate_dnar(ens, k, cfg.integrator);
  const auto diag = particle::diagnostics(traj);
  bool omega_constant = true;
  for (const auto& f : traj.frames) omega_constant = omega_constant && f.omega == ens.omega;
  out.write_text("trajectory.csv", trajectory_csv(traj));
  out.write_text("diagnostics.csv", series_csv({"t", "kinetic_energy", "velocity_diameter", "position_diameter"},
                                               {diag.t, diag.kinetic_energy, diag.velocity_diameter,
                                                diag.position_diameter}));
  out.write_json("summary.json", {{"mode", "particles-dnar"},
                                  {"kernel", k.name()},
                                  {"count", ens.count},
                                  {"dim", ens.dim},
                                  {"frames", traj.frames.size()},
                                  {"omega_constant", omega_constant},
                                  {"center_of_mass_final", diag.center_of_mass.back()},
                                  {"max_position_diameter", *std::max_element(diag.position_diameter.begin(),
                                                                              diag.position_diameter.end())}});
}

void run_particles_cs(const RunConfig& cfg, OutputDir& out) {
  const auto psi = weight_spec(cfg);
  const auto ens = sample_ensemble(cfg, psi.dim);
  const auto traj = particle::integrate_cs(ens, psi, cfg.integrator);
  const auto diag = particle::diagnostics(traj);
  double worst_increase = 0.0;
  for (std::size_t i = 1; i < diag.kinetic_energy.size(); ++i)
    worst_increase = std::max(worst_increase, diag.kinetic_energy[i] - diag.kinetic_energy[i - 1]);
  const double drift = max_abs_diff_from_first(diag.momentum) / cfg.integrator.t_final;
  out.write_text("trajectory.csv", trajectory_csv(traj));
  out.write_text("diagnostics.csv", series_csv({"t", "kinetic_energy", "velocity_diameter", "position_diameter"},
                                               {diag.t, diag.kinetic_energy, diag.velocity_diameter,
                                                diag.position_diameter}));
  out.write_json("summary.json", {{"mode", "particles-cs"},
                                  {"weight", psi.name()},
                                  {"count", ens.count},
                                  {"dim", ens.dim},
                                  {"frames", traj.frames.size()},
                                  {"max_kinetic_energy_increase", worst_increase},
                                  {"energy_nonincreasing", worst_increase <= 1e-9},
                                  {"momentum_drift_per_time", drift},
                                  {"final_velocity_diameter", diag.velocity_diameter.back()}});
}

void run_hydro(const RunConfig& cfg, OutputDir& out) {
  const auto hc = hydro_config(cfg);
  const auto& h = cfg.hydro;
  hydro::GridField1D f;
  f.length = h.length;
  f.rho.resize(h.cells);
  f.w.resize(h.cells);
  const double k = 2.0 * std::numbers::pi / h.length;
  for (int i = 0; i < h.cells; ++i) {
    f.rho[i] = (1.0 + h.rho_amplitude * std::cos(k * f.center(i))) / h.length;
    f.w[i] = h.w_amplitude * std::sin(k * f.center(i));
  }
  const auto sol = hydro::solve(f, hc);

  const double m0 = f.mass();
  double mass_drift = 0.0, w_violation = 0.0;
  const auto [w0lo, w0hi] = std::minmax_element(f.w.begin(), f.w.end());
  for (std::size_t i = 0; i < sol.frames.size(); ++i) {
    mass_drift = std::max(mass_drift, std::abs(sol.field(i).mass() - m0) / m0);
    const auto [lo, hi] = std::minmax_element(sol.frames[i].w.begin(), sol.frames[i].w.end());
    w_violation = std::max({w_violation, *hi - *w0hi, *w0lo - *lo});
  }
  const hydro::OffsetKernel ok(hc.kernel, h.length, hc.window_radius);
  const bool smooth_weight = !std::holds_alternative<kernel::WeaklySingular>(hc.kernel.form);
  const auto em = hydro::e_monitor(sol, smooth_weight ? &ok : nullptr);

  json summary = {{"mode", "hydro"},
                  {"kernel", hc.kernel.name()},
                  {"cells", h.cells},
                  {"steps", sol.steps},
                  {"frames", sol.frames.size()},
                  {"relative_mass_drift", mass_drift},
                  {"w_max_principle_violation", std::max(0.0, w_violation)},
                  {"e_integral_max", em.max_abs_integral()},
                  {"e_residual_max", em.max_residual()},
                  {"kinetic_residual", hydro::kinetic_residual(sol)}};
  if (smooth_weight) {
    summary["e_identity_gap_max"] = em.max_identity_gap();
    summary["eam_residual"] = hydro::eam_residual(sol, ok);
  }
  out.write_text("hydro.csv", hydro_csv(sol));
  out.write_json("summary.json", summary);
}

void run_study_cc(const RunConfig& cfg, const RunOptions& opts, OutputDir& out) {
  auto mc = meanfield_config(cfg);
  if (opts.workers) mc.workers = static_cast<unsigned>(*opts.workers);
  const auto res = meanfield::convergence_in_N(mc);
  json runs = json::array();
  std::size_t idx = 0;
  for (const auto& r : res.runs) {
    const std::size_t s = idx++ % static_cast<std::size_t>(mc.seeds);
    const std::string name = run_file_name(r.count, s);
    out.write_text(name, series_csv({"t", "E1", "E2", "E"}, {r.series.t, r.series.e1, r.series.e2, r.series.total()}));
    runs.push_back({{"count", r.count},
                    {"seed", r.seed},
                    {"file", name},
                    {"sup_E", r.series.sup_total()},
                    {"E1_0", r.series.e1.front()},
                    {"E2_0", r.series.e2.front()},
                    {"c_observed", r.bound.c_observed},
                    {"absolute_mode", r.bound.absolute_mode},
                    {"within_c_config", r.bound.within_config},
                    {"momentum_functional_sup", r.momentum_sup}});
  }
  json rep = report_json(res.report);
  rep["runs"] = runs;
  out.write_json("report.json", rep);
}

void write_study(const meanfield::StudyReport& rep, OutputDir& out) {
  for (const auto& s : rep.series) out.write_text("series_" + s.name + ".csv", series_csv({"t", s.name}, {s.x, s.y}));
  out.write_json("report.json", report_json(rep));
}

void run_study_contractivity(const RunConfig& cfg, OutputDir& out) {
  const auto k = kernel_spec(cfg.kernel);
  const auto a = sample_ensemble(cfg, k.dim);
  particle::Ensemble b = a;
  std::vector<double> noise(b.x.size());
  particle::sample(noise, b.count, b.dim, particle::Layout::Gaussian, 0.0, cfg.study.perturbation,
                   stream_seed(cfg.seed, 3));
  for (std::size_t i = 0; i < noise.size(); ++i) b.x[i] += noise[i];
  // Recentre the twin so both share the centre of mass.
  for (int c = 0; c < b.dim; ++c) {
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < b.count; ++i) {
      ma += a.x[i * b.dim + c];
      mb += b.x[i * b.dim + c];
    }
    const double shift = (ma - mb) / b.count;
    for (int i = 0; i < b.count; ++i) b.x[i * b.dim + c] += shift;
  }
  write_study(meanfield::contractivity_study(a, b, k, cfg.integrator), out);
}

void run_study_equilibrium(const RunConfig& cfg, OutputDir& out) {
  const auto k = kernel_spec(cfg.kernel);
  auto ens = sample_ensemble(cfg, k.dim);
  particle::remove_mean(ens.omega, ens.count, ens.dim);
  write_study(meanfield::equilibrium_study(ens, k, cfg.integrator), out);
}

void run_study_equivalence(const RunConfig& cfg, OutputDir& out) {
  const auto k = kernel_spec(cfg.kernel);
  const auto ens = sample_ensemble(cfg, k.dim);
  const auto full = particle::equivalence_check(ens, k, cfg.integrator);
  auto half_cfg = cfg.integrator;
  half_cfg.dt *= 0.5;
  half_cfg.record_every *= 2;
  const auto half = particle::equivalence_check(ens, k, half_cfg);
  out.write_json("report.json", {{"kind", "equivalence"},
                                 {"kernel", k.name()},
                                 {"count", ens.count},
                                 {"dim", ens.dim},
                                 {"dt", cfg.integrator.dt},
                                 {"max_position_gap", full.max_position_gap},
                                 {"max_velocity_gap", full.max_velocity_gap},
                                 {"max_gap", full.max_gap()},
                                 {"max_gap_half_dt", half.max_gap()},
                                 {"reduction_ratio", half.max_gap() > 0.0 ? full.max_gap() / half.max_gap() : 0.0}});
}

void run_metrics(const RunOptions& opts, OutputDir& out) {
  if (!opts.a || !opts.b) fail(ErrorCode::SchemaError, "metrics: both --a and --b are required");
  const auto a = read_measure(*opts.a);
  const auto b = read_measure(*opts.b);
  const json report = metrics_report(a, b);
  out.write_json("metrics.json", report);
  std::cout << report.dump(2) << "\n";
}

}  // namespace

json metrics_report(const AnyMeasure& a, const AnyMeasure& b) {
  json j = distances(as_flat(a), as_flat(b));
  const auto* fa = std::get_if<transport::FiberedMeasure>(&a);
  const auto* fb = std::get_if<transport::FiberedMeasure>(&b);
  if (fa && fb) {
    try {
      j["fibered_w2"] = {{"defined", true}, {"value", transport::fibered_w2(*fa, *fb)}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MarginalMismatch) throw;
      j["fibered_w2"] = {{"defined", false}, {"error", to_string(e.code())}, {"reason", e.what()}};
    }
    j["adapted_w2"] = {{"value", transport::adapted_w2(*fa, *fb)}};
  }
  return j;
}

void execute(const RunConfig& cfg, const RunOptions& opts, const std::filesystem::path& out_dir) {
  OutputDir out(out_dir);
  out.write_json("effective_config.json", to_json(cfg));
  const std::string& m = cfg.mode;
  if (m == "kernel-check") run_kernel_check(cfg, out);
  else if (m == "particles-dnar") run_particles_dnar(cfg, out);
  else if (m == "particles-cs") run_particles_cs(cfg, out);
  else if (m == "hydro") run_hydro(cfg, out);
  else if (m == "metrics") run_metrics(opts, out);
  else if (m == "study-cc") run_study_cc(cfg, opts, out);
  else if (m == "study-contractivity") run_study_contractivity(cfg, out);
  else if (m == "study-equilibrium") run_study_equilibrium(cfg, out);
  else if (m == "study-equivalence") run_study_equivalence(cfg, out);
  else fail(ErrorCode::SchemaError, "mode: unknown mode '" + m + "'");
  out.write_manifest();
}

int run(const RunOptions& opts, std::ostream& err) {
  try {
    RunConfig cfg;
    if (opts.config) {
      std::ifstream in(*opts.config, std::ios::binary);
      if (!in) fail(ErrorCode::SchemaError, "cannot read config file " + opts.config->string());
      std::ostringstream ss;
      ss << in.rdbuf();
      cfg = parse_config(ss.str());
      if (!cfg.mode.empty() && cfg.mode != opts.mode)
        fail(ErrorCode::SchemaError, "mode: config selects '" + cfg.mode + "' but the command line selects '" +
                                         opts.mode + "'");
    } else if (opts.mode != "metrics") {
      fail(ErrorCode::SchemaError, "--config is required for mode " + opts.mode);
    }
    cfg.mode = opts.mode;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.workers) {
      if (*opts.workers < 1) fail(ErrorCode::SchemaError, "--workers must be >= 1");
      cfg.study.workers = *opts.workers;
    }
    if (opts.out) cfg.output_dir = opts.out->string();
    execute(cfg, opts, cfg.output_dir);
    return kSuccess;
  } catch (const Error& e) {
    err << "dnarlab: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::NonFiniteState:
      case ErrorCode::SingularEvaluation:
      case ErrorCode::NonNormalizable:
        return kNumericalFailure;
      default:
        return kConfigError;
    }
  } catch (const std::exception& e) {
    err << "dnarlab: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace dnar::app
