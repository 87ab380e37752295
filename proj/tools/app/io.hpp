#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dnar/hydro1d.hpp"
#include "dnar/meanfield.hpp"
#include "dnar/particle.hpp"
#include "dnar/transport.hpp"

namespace dnar::app {

/// Shortest text that round-trips the double.
std::string format_double(double x);

std::string sha256_hex(const std::string& bytes);

/// Output directory owned by one run. Every file goes through write_* so the
/// manifest can list it with its checksum.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  /// manifest.json: every emitted file with size and SHA-256, sorted by name.
  void write_manifest();
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, contents
};

using AnyMeasure = std::variant<transport::DiscreteMeasure, transport::FiberedMeasure>;

/// CSV (`weight,p0..p{m-1}`) or JSON ({dimension, atoms} or
/// {fibered: true, x_dim, omega_dim, fibers}). Throws FormatError.
AnyMeasure read_measure(const std::filesystem::path& path);
AnyMeasure parse_measure(const std::string& text, const std::string& name);
std::string measure_csv(const transport::DiscreteMeasure& mu);
nlohmann::json measure_json(const transport::DiscreteMeasure& mu);
nlohmann::json measure_json(const transport::FiberedMeasure& mu);

std::string trajectory_csv(const particle::Trajectory& traj);
std::string hydro_csv(const hydro::HydroSolution& sol);
std::string series_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

nlohmann::json report_json(const meanfield::StudyReport& rep);

}  // namespace dnar::app
