#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "amod/data.hpp"
#include "amod/simulator.hpp"
#include "amod/training/trainer.hpp"

namespace amod {

/// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceSpec {
  int zones = 5;
  ZoneScale scale = ZoneScale::small;
  int vehicles = 4;
  int max_wait_steps = 5;
  int episode_length = 60;
  double revenue_per_km = 5.00;
  double cost_per_km = 4.50;
  PlacementRule placement = PlacementRule::uniform_random;
  std::vector<ZoneId> fixed_positions;
  std::uint64_t placement_seed = 0;

  EpisodeConfig build() const;
};

/// Where training, validation and test streams come from. Synthetic streams
/// are generated from seeds; historical ones are loaded from directories of
/// stream files (sorted by file name).
struct DataSpec {
  StreamSource source = StreamSource::synthetic;
  SynthSpec synth;
  std::uint64_t train_seed = 1;
  std::uint64_t validation_seed = 100000;
  std::uint64_t test_seed = 200000;
  int validation_streams = 10;
  int test_streams = 10;
  std::filesystem::path train_dir;
  std::filesystem::path validation_dir;
  std::filesystem::path test_dir;
};

struct RunConfig {
  InstanceSpec instance;
  TrainingConfig training;
  std::vector<std::uint64_t> seeds{1};
  DataSpec data;
  std::filesystem::path output_dir = "runs";
  std::int64_t validation_interval = 5000;
  std::int64_t checkpoint_interval = 20000;
};

inline constexpr const char* kOutputRootEnv = "AMOD_OUTPUT_ROOT";

/// Strict parse: unknown keys, wrong types and missing referenced files
/// throw ConfigError. Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& cfg);

/// Applies "a.b.c=value" to a config tree. The value is read as JSON when it
/// parses, otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Output directory, placed under $AMOD_OUTPUT_ROOT when that is set and the
/// configured directory is relative.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

StreamProvider training_streams(const RunConfig& cfg);
std::vector<RequestStream> validation_streams(const RunConfig& cfg);
std::vector<RequestStream> test_streams(const RunConfig& cfg);

/// Stream files (*.stream) of a directory in name order.
std::vector<std::filesystem::path> stream_files(const std::filesystem::path& dir);

/// Streams must fit the instance's zone count and episode length.
void check_streams(const std::vector<RequestStream>& streams, const EpisodeConfig& instance);

}  // namespace amod
