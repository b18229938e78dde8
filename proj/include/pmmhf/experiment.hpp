#ifndef PMMHF_EXPERIMENT_HPP
#define PMMHF_EXPERIMENT_HPP

#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pmmhf/config.hpp"

namespace pmmhf {

enum class Command { Simulate, Calibrate, Pmmh, Forecast, Report };

std::string_view to_string(Command c);
Command parse_command(std::string_view name);

struct RunOptions {
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

/// Writes artifacts as `<name>.partial` and renames them all on commit(), so
/// a failed run leaves only `.partial` files behind.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  /// Renames every staged file; returns checksum per artifact name.
  std::map<std::string, std::string> commit();

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> staged_;
  std::map<std::string, std::string> checksums_;
};

/// True for keys that hold wall-clock measurements.
bool is_timing_key(std::string_view key);
/// FNV-1a of the artifact with timing content removed: timing keys are
/// dropped from JSON, timing columns from CSV, and `*_timing.csv` files
/// hash to "timing".
std::string artifact_checksum(const std::string& name, const std::string& content);

/// "DPF(L=30)" -> "DPF_L30".
std::string file_slug(const std::string& label);

/// Observations for the run: the CSV named in the config or a simulated
/// series.
std::vector<double> experiment_data(const ExperimentConfig& config);

/// FNV-1a of the canonical config, ignoring `output` and `jobs`.
std::string config_hash(const ExperimentConfig& config);

struct RunSummary {
  std::filesystem::path output_dir;
  std::map<std::string, std::string> checksums;
  nlohmann::json manifest;
};

RunSummary run_experiment(Command command, ExperimentConfig config, const RunOptions& options);

/// 2 config, 3 data, 4 numerical; 1 for anything else.
int exit_code_for(const std::exception& e);

}  // namespace pmmhf

#endif
