#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"
#include "io.hpp"

namespace dnar::app {

enum ExitCode { kSuccess = 0, kNumericalFailure = 1, kConfigError = 2 };

struct RunOptions {
  std::string mode;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::filesystem::path> a;  // metrics inputs
  std::optional<std::filesystem::path> b;
};

/// Loads the config, applies command-line overrides and runs the mode.
/// Diagnostics go to `err`; returns the process exit code.
int run(const RunOptions& opts, std::ostream& err);

/// Runs an already validated config into `out_dir`.
void execute(const RunConfig& cfg, const RunOptions& opts, const std::filesystem::path& out_dir);

/// Distances between two measures as the metrics report.
nlohmann::json metrics_report(const AnyMeasure& a, const AnyMeasure& b);

}  // namespace dnar::app
