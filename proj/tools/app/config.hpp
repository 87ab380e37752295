#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnar/hydro1d.hpp"
#include "dnar/kernel.hpp"
#include "dnar/meanfield.hpp"
#include "dnar/particle.hpp"

namespace dnar::app {

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& modes() {
  static const std::vector<std::string> m{"particles-dnar",     "particles-cs",       "hydro",
                                          "metrics",            "study-cc",           "study-contractivity",
                                          "study-equilibrium",  "study-equivalence",  "kernel-check"};
  return m;
}

struct KernelBlock {
  std::string type = "quadratic";  // quadratic | weakly_singular | smooth_compact | scalar_bump
  double lambda = 1.0;
  double alpha = 0.5;
  double radius = 1.0;
  double amplitude = 1.0;
  int dim = 2;
};

struct ParticleBlock {
  int count = 16;
  std::string layout = "gaussian";  // uniform_box | gaussian | lattice
  double center = 0.0;
  double scale = 1.0;
  std::string omega_layout = "gaussian";
  double omega_scale = 1.0;
  bool zero_mean_omega = false;
  std::string velocity_layout = "gaussian";  // alignment runs
  double velocity_scale = 1.0;
};

struct HydroBlock {
  double length = 1.0;
  int cells = 256;
  double cfl = 0.4;
  double t_final = 1.0;
  std::string limiter = "none";
  double record_every = 0.05;
  double window_radius = 0.0;
  double rho_amplitude = 0.5;
  double w_amplitude = 0.05;
};

struct StudyBlock {
  std::vector<int> n_values{50, 100, 200, 400, 800};
  int seeds = 8;
  int cells = 4096;
  double length = 1.0;
  double radius = 0.25;
  double amplitude = 1.0;
  double rho_amplitude = 0.5;
  double w_amplitude = 0.05;
  double t_final = 1.0;
  double record_every = 0.05;
  double particle_dt = 5e-3;
  double c_config = 1e6;
  int workers = 1;
  int samples = 1000;
  double perturbation = 0.5;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string mode;
  std::uint64_t seed = 0;
  std::string output_dir = "dnarlab_out";
  KernelBlock kernel;
  std::optional<KernelBlock> weight;
  ParticleBlock particles;
  particle::IntegratorConfig integrator;
  HydroBlock hydro;
  StudyBlock study;
};

/// Parses and validates a JSON run file. Throws Error(SchemaError) naming the
/// offending key path, Error(VersionError) for unsupported schema versions.
RunConfig parse_config(const std::string& text);
RunConfig default_config(const std::string& mode);

nlohmann::json to_json(const RunConfig& cfg);

kernel::KernelSpec kernel_spec(const KernelBlock& k);
kernel::MatrixWeightSpec weight_spec(const RunConfig& cfg);
hydro::HydroConfig hydro_config(const RunConfig& cfg);
meanfield::MeanFieldConfig meanfield_config(const RunConfig& cfg);

}  // namespace dnar::app
