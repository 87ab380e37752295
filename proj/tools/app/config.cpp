#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dnar/error.hpp"

namespace dnar::app {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  fail(ErrorCode::SchemaError, path + ": " + msg);
}

// Reads the keys of one JSON object, remembering which ones were consumed so
// leftovers can be rejected as unknown.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) schema_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) schema_error(at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) schema_error(at(key), "must be finite");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) schema_error(at(key), "expected an integer");
      const auto z = v->get<long long>();
      if (z < -2147483647LL || z > 2147483647LL) schema_error(at(key), "out of range");
      out = static_cast<int>(z);
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) schema_error(at(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) schema_error(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void choice(const std::string& key, std::string& out, const std::vector<std::string>& allowed) {
    if (const json* v = take(key)) {
      if (!v->is_string()) schema_error(at(key), "expected a string");
      out = v->get<std::string>();
      if (std::find(allowed.begin(), allowed.end(), out) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        schema_error(at(key), "'" + out + "' is not one of {" + list + "}");
      }
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) schema_error(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void int_list(const std::string& key, std::vector<int>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) schema_error(at(key), "expected an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number_integer()) schema_error(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
        out.push_back((*v)[i].get<int>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) schema_error(at(it.key()), "unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) schema_error(path, msg);
}

const std::vector<std::string> kKernelTypes{"quadratic", "weakly_singular", "smooth_compact", "scalar_bump"};
const std::vector<std::string> kLayouts{"uniform_box", "gaussian", "lattice"};

KernelBlock read_kernel(const json& j, const std::string& path) {
  KernelBlock k;
  Block b(j, path);
  b.choice("type", k.type, kKernelTypes);
  b.number("lambda", k.lambda);
  b.number("alpha", k.alpha);
  b.number("radius", k.radius);
  b.number("amplitude", k.amplitude);
  b.integer("dim", k.dim);
  b.finish();
  check(k.lambda > 0.0, b.at("lambda"), "must be > 0");
  check(k.alpha > 0.0 && k.alpha < 1.0, b.at("alpha"), "must lie in (0, 1)");
  check(k.radius > 0.0, b.at("radius"), "must be > 0");
  check(k.amplitude > 0.0, b.at("amplitude"), "must be > 0");
  check(k.dim >= 1 && k.dim <= 16, b.at("dim"), "must lie in [1, 16]");
  return k;
}

json kernel_json(const KernelBlock& k) {
  return {{"type", k.type},     {"lambda", k.lambda},       {"alpha", k.alpha},
          {"radius", k.radius}, {"amplitude", k.amplitude}, {"dim", k.dim}};
}

}  // namespace

RunConfig default_config(const std::string& mode) {
  RunConfig c;
  c.mode = mode;
  return c;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaError, std::string("<root>: not valid JSON: ") + e.what());
  }
  RunConfig c;
  Block root(j, "");
  if (const json* v = root.take("schema_version")) {
    if (!v->is_number_integer()) schema_error("schema_version", "expected an integer");
    c.schema_version = v->get<int>();
    if (c.schema_version != kSchemaVersion)
      fail(ErrorCode::VersionError, "unsupported schema_version " + std::to_string(c.schema_version) +
                                        " (supported: " + std::to_string(kSchemaVersion) + ")");
  }
  root.choice("mode", c.mode, modes());
  root.unsigned64("seed", c.seed);
  root.text("output_dir", c.output_dir);
  if (const json* v = root.take("kernel")) c.kernel = read_kernel(*v, "kernel");
  if (const json* v = root.take("weight")) {
    c.weight = read_kernel(*v, "weight");
  }

  if (const json* v = root.take("particles")) {
    Block b(*v, "particles");
    auto& p = c.particles;
    b.integer("count", p.count);
    b.choice("layout", p.layout, kLayouts);
    b.number("center", p.center);
    b.number("scale", p.scale);
    b.choice("omega_layout", p.omega_layout, kLayouts);
    b.number("omega_scale", p.omega_scale);
    b.boolean("zero_mean_omega", p.zero_mean_omega);
    b.choice("velocity_layout", p.velocity_layout, kLayouts);
    b.number("velocity_scale", p.velocity_scale);
    b.finish();
    check(p.count >= 1, b.at("count"), "must be >= 1");
    check(p.scale >= 0.0, b.at("scale"), "must be >= 0");
    check(p.omega_scale >= 0.0, b.at("omega_scale"), "must be >= 0");
    check(p.velocity_scale >= 0.0, b.at("velocity_scale"), "must be >= 0");
  }

  if (const json* v = root.take("integrator")) {
    Block b(*v, "integrator");
    auto& g = c.integrator;
    std::string scheme = g.scheme == particle::Scheme::RK4 ? "rk4" : "forward_euler";
    b.choice("scheme", scheme, {"rk4", "forward_euler"});
    g.scheme = scheme == "rk4" ? particle::Scheme::RK4 : particle::Scheme::ForwardEuler;
    b.number("dt", g.dt);
    b.number("t_final", g.t_final);
    b.integer("record_every", g.record_every);
    b.finish();
    check(g.dt > 0.0, b.at("dt"), "must be > 0");
    check(g.t_final > 0.0, b.at("t_final"), "must be > 0");
    check(g.dt <= g.t_final, b.at("dt"), "must not exceed t_final");
    check(g.t_final / g.dt < 1e12, b.at("dt"), "t_final/dt is too large");
    check(g.record_every >= 1, b.at("record_every"), "must be >= 1");
  }

  if (const json* v = root.take("hydro")) {
    Block b(*v, "hydro");
    auto& h = c.hydro;
    b.number("length", h.length);
    b.integer("cells", h.cells);
    b.number("cfl", h.cfl);
    b.number("t_final", h.t_final);
    b.choice("limiter", h.limiter, {"none", "minmod"});
    b.number("record_every", h.record_every);
    b.number("window_radius", h.window_radius);
    b.number("rho_amplitude", h.rho_amplitude);
    b.number("w_amplitude", h.w_amplitude);
    b.finish();
    check(h.length > 0.0, b.at("length"), "must be > 0");
    check(h.cells >= 2, b.at("cells"), "must be >= 2");
    check(h.cfl > 0.0 && h.cfl <= 1.0, b.at("cfl"), "must lie in (0, 1]");
    check(h.t_final > 0.0, b.at("t_final"), "must be > 0");
    check(h.window_radius >= 0.0, b.at("window_radius"), "must be >= 0");
    check(std::abs(h.rho_amplitude) < 1.0, b.at("rho_amplitude"), "must keep the density positive (|a| < 1)");
  }

  if (const json* v = root.take("study")) {
    Block b(*v, "study");
    auto& s = c.study;
    b.int_list("n_values", s.n_values);
    b.integer("seeds", s.seeds);
    b.integer("cells", s.cells);
    b.number("length", s.length);
    b.number("radius", s.radius);
    b.number("amplitude", s.amplitude);
    b.number("rho_amplitude", s.rho_amplitude);
    b.number("w_amplitude", s.w_amplitude);
    b.number("t_final", s.t_final);
    b.number("record_every", s.record_every);
    b.number("particle_dt", s.particle_dt);
    b.number("c_config", s.c_config);
    b.integer("workers", s.workers);
    b.integer("samples", s.samples);
    b.number("perturbation", s.perturbation);
    b.finish();
    check(s.n_values.size() >= 3, b.at("n_values"), "needs at least three entries");
    for (std::size_t i = 0; i < s.n_values.size(); ++i) {
      check(s.n_values[i] >= 1, b.at("n_values"), "entries must be >= 1");
      if (i) check(s.n_values[i] > s.n_values[i - 1], b.at("n_values"), "must be increasing");
    }
    check(s.seeds >= 1, b.at("seeds"), "must be >= 1");
    check(s.cells >= 8, b.at("cells"), "must be >= 8");
    check(s.length > 0.0, b.at("length"), "must be > 0");
    check(s.radius > 0.0, b.at("radius"), "must be > 0");
    check(s.amplitude > 0.0, b.at("amplitude"), "must be > 0");
    check(std::abs(s.rho_amplitude) < 1.0, b.at("rho_amplitude"), "must keep the density positive (|a| < 1)");
    check(s.t_final > 0.0, b.at("t_final"), "must be > 0");
    check(s.record_every > 0.0, b.at("record_every"), "must be > 0");
    check(s.particle_dt > 0.0, b.at("particle_dt"), "must be > 0");
    const double ratio = s.record_every / s.particle_dt;
    check(std::abs(ratio - std::round(ratio)) < 1e-9, b.at("record_every"), "must be a multiple of particle_dt");
    check(s.c_config > 0.0, b.at("c_config"), "must be > 0");
    check(s.workers >= 1, b.at("workers"), "must be >= 1");
    check(s.samples >= 1, b.at("samples"), "must be >= 1");
    check(s.perturbation >= 0.0, b.at("perturbation"), "must be >= 0");
  }
  root.finish();
  if (c.weight && c.weight->dim != c.kernel.dim && c.mode != "kernel-check")
    schema_error("weight.dim", "must match kernel.dim");
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["mode"] = c.mode;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["kernel"] = kernel_json(c.kernel);
  j["weight"] = c.weight ? kernel_json(*c.weight) : json(nullptr);
  const auto& p = c.particles;
  j["particles"] = {{"count", p.count},
                    {"layout", p.layout},
                    {"center", p.center},
                    {"scale", p.scale},
                    {"omega_layout", p.omega_layout},
                    {"omega_scale", p.omega_scale},
                    {"zero_mean_omega", p.zero_mean_omega},
                    {"velocity_layout", p.velocity_layout},
                    {"velocity_scale", p.velocity_scale}};
  const auto& g = c.integrator;
  j["integrator"] = {{"scheme", g.scheme == particle::Scheme::RK4 ? "rk4" : "forward_euler"},
                     {"dt", g.dt},
                     {"t_final", g.t_final},
                     {"record_every", g.record_every}};
  const auto& h = c.hydro;
  j["hydro"] = {{"length", h.length},
                {"cells", h.cells},
                {"cfl", h.cfl},
                {"t_final", h.t_final},
                {"limiter", h.limiter},
                {"record_every", h.record_every},
                {"window_radius", h.window_radius},
                {"rho_amplitude", h.rho_amplitude},
                {"w_amplitude", h.w_amplitude}};
  const auto& s = c.study;
  j["study"] = {{"n_values", s.n_values},   {"seeds", s.seeds},
                {"cells", s.cells},         {"length", s.length},
                {"radius", s.radius},       {"amplitude", s.amplitude},
                {"rho_amplitude", s.rho_amplitude}, {"w_amplitude", s.w_amplitude},
                {"t_final", s.t_final},     {"record_every", s.record_every},
                {"particle_dt", s.particle_dt}, {"c_config", s.c_config},
                {"workers", s.workers},     {"samples", s.samples},
                {"perturbation", s.perturbation}};
  if (c.weight == std::nullopt) j.erase("weight");
  return j;
}

kernel::KernelSpec kernel_spec(const KernelBlock& k) {
  if (k.type == "quadratic") return kernel::KernelSpec::quadratic(k.lambda, k.dim);
  if (k.type == "weakly_singular") return kernel::KernelSpec::weakly_singular(k.alpha, k.dim);
  if (k.type == "smooth_compact") return kernel::KernelSpec::smooth_compact(k.radius, k.amplitude, k.dim);
  schema_error("kernel.type", "'" + k.type + "' is a matrix weight, not a potential");
}

kernel::MatrixWeightSpec weight_spec(const RunConfig& cfg) {
  const KernelBlock& k = cfg.weight ? *cfg.weight : cfg.kernel;
  if (k.type == "scalar_bump") return kernel::MatrixWeightSpec::scalar_bump(k.radius, k.amplitude, k.dim);
  return kernel::MatrixWeightSpec::from_kernel(kernel_spec(k));
}

hydro::HydroConfig hydro_config(const RunConfig& cfg) {
  hydro::HydroConfig h;
  KernelBlock k = cfg.kernel;
  if (k.dim != 1) schema_error("kernel.dim", "hydro runs need a one-dimensional kernel");
  h.kernel = kernel_spec(k);
  h.window_radius = cfg.hydro.window_radius;
  h.cfl = cfg.hydro.cfl;
  h.t_final = cfg.hydro.t_final;
  h.limiter = cfg.hydro.limiter == "minmod" ? hydro::Limiter::Minmod : hydro::Limiter::None;
  h.record_every = cfg.hydro.record_every;
  return h;
}

meanfield::MeanFieldConfig meanfield_config(const RunConfig& cfg) {
  const auto& s = cfg.study;
  meanfield::MeanFieldConfig m;
  m.length = s.length;
  m.radius = s.radius;
  m.amplitude = s.amplitude;
  m.rho_amplitude = s.rho_amplitude;
  m.w_amplitude = s.w_amplitude;
  m.cells = s.cells;
  m.t_final = s.t_final;
  m.record_every = s.record_every;
  m.particle_dt = s.particle_dt;
  m.n_values = s.n_values;
  m.seeds = s.seeds;
  m.master_seed = cfg.seed;
  m.workers = static_cast<unsigned>(s.workers);
  m.c_config = s.c_config;
  return m;
}

}  // namespace dnar::app
