#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "relaycap/capacity.hpp"
#include "relaycap/topology.hpp"

// Experiment configuration files (JSON). Every hop model is stored at unit
// mean SNR; a grid point at snr_db rescales all hops by 10^(snr_db/10).
namespace relaycap::config {

enum class Format { Csv, Json };

struct McSettings {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t batch = 1 << 16;
};

struct ExperimentConfig {
  std::string name;
  topology::Topology topology;
  std::vector<capacity::Policy> policies;
  capacity::Prelog prelog;
  std::vector<double> snr_db;
  std::vector<double> tau;  // linear outage thresholds; empty picks quantiles
  McSettings mc;
  std::string output_path = "-";
  Format format = Format::Csv;
  int jobs = 1;
};

/// Throws Error(ConfigError) on syntax errors, unknown keys, unknown model
/// names, out-of-range values and an empty SNR grid.
ExperimentConfig parse(std::string_view text);
ExperimentConfig load(const std::filesystem::path& path);

/// Mean SNR per hop at a grid point.
double linear_snr(double snr_db);

/// Human-readable description of every configuration key.
std::string schema_help();

}  // namespace relaycap::config
