#ifndef PMMHF_CONFIG_HPP
#define PMMHF_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmmhf/filters.hpp"
#include "pmmhf/forecast.hpp"
#include "pmmhf/models.hpp"
#include "pmmhf/pmmh.hpp"

namespace pmmhf {

struct DataConfig {
  enum class Source { Simulate, File };
  Source source = Source::Simulate;
  std::string path;            // File: CSV of returns
  std::size_t length = 0;      // Simulate: number of observations
  std::string dgp = "model";   // Simulate: "model" or "svij"
  SvijParams svij;
  std::optional<std::uint64_t> seed;  // defaults to one derived from the run seed
};

struct FilterSpec {
  FilterKind kind = FilterKind::BPF;
  std::optional<std::size_t> particles;  // nullopt: calibrate N_opt
  std::size_t matches = 1;
  int sigma_size = 0;
  ResamplingScheme resampling = ResamplingScheme::Multinomial;

  FilterConfig with_particles(std::size_t n) const;
};

struct CalibrationConfig {
  std::size_t n_s = 1000;
  std::size_t replications = 100;
};

struct PriorConfig {
  std::string kind = "default";  // "default", "forecast_sv" or "normal"
  std::vector<double> mean;
  std::vector<std::vector<double>> covariance;
};

struct PmmhConfig {
  std::size_t iterations = 110000;
  std::size_t burn_in = 10000;
  PriorConfig prior;
  std::optional<std::vector<double>> theta0;
  AdaptiveProposal::Settings proposal;
};

struct ForecastConfig {
  std::size_t horizon = 50;
  std::size_t refresh_every = 50;
  std::size_t mh_iterations = 5000;
  std::size_t burn_in = 0;
  std::size_t thin = 5;
  std::size_t particles = 300;
  GridSettings grid;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelKind family = ModelKind::LG;
  std::optional<ModelParams> params;  // nullopt: "estimate"
  DataConfig data;
  std::vector<FilterSpec> filters;
  CalibrationConfig calibration;
  PmmhConfig pmmh;
  ForecastConfig forecast;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string output = "out";
  /// Directory of the config file; relative data paths resolve against it.
  std::filesystem::path base_dir;

  Prior prior() const;
  Model model() const;  // ConfigError when params are absent
};

/// ConfigError on a missing seed, unknown keys' values of the wrong type,
/// or a filter the model does not support.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Compact dump with sorted keys.
std::string canonical_json(const nlohmann::json& j);
/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace pmmhf

#endif
