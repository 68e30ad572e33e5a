#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amod/run_config.hpp"

namespace amod::cli {

namespace fs = std::filesystem;

/// Failure that is not the configuration's fault; the CLI maps it to exit 3.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Run-directory layout.
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kMetricsFile = "metrics.jsonl";
inline constexpr const char* kValidationFile = "validation.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.ckpt";
inline constexpr const char* kBestActorFile = "best_actor.ckpt";
inline constexpr const char* kFinalActorFile = "final_actor.ckpt";
inline constexpr const char* kSummaryFile = "summary.json";

/// <output>/<algorithm>/seed<k>
fs::path run_directory(const RunConfig& cfg, std::uint64_t seed);

struct TrainOptions {
  bool resume = false;
  /// Progress lines; null silences them.
  std::ostream* progress = nullptr;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  fs::path directory;
  bool ok = false;
  std::string message;
  std::int64_t steps = 0;
  std::optional<double> best_validation;
  std::int64_t best_step = 0;
};

/// Trains one seed into its run directory, writing metrics, the latest
/// full checkpoint (between episodes), the best-validation actor and the
/// final actor. Numerical failures end the seed with ok = false.
SeedOutcome train_seed(const RunConfig& cfg, std::uint64_t seed, const TrainOptions& options);

/// Every configured seed, in order; a failed seed does not stop the others.
std::vector<SeedOutcome> train_all(const RunConfig& cfg, const TrainOptions& options);

struct DryRunPlan {
  nlohmann::json config;
  std::size_t seeds = 0;
  std::int64_t env_steps_per_seed = 0;
  std::int64_t gradient_steps_per_seed = 0;
  std::int64_t total_env_steps = 0;
  int critic_networks = 0;
  std::vector<std::string> run_directories;
};
DryRunPlan plan_training(const RunConfig& cfg);
nlohmann::json to_json(const DryRunPlan& plan);

struct EvalOptions {
  std::vector<fs::path> run_dirs;
  /// Config for the instance and test streams; defaults to the first run's.
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  /// Directory of .stream files replacing the configured test streams.
  std::optional<fs::path> streams_dir;
  fs::path out_dir;
  std::string checkpoint = kBestActorFile;
};

struct EvalRun {
  std::string policy;
  std::uint64_t seed = 0;
  fs::path run_dir;
  std::vector<double> profits;
  std::optional<double> validation_best;
};

struct EvalResult {
  std::vector<std::string> dates;
  std::vector<double> greedy;
  double greedy_validation = 0.0;
  std::vector<EvalRun> runs;
};

/// Test-mode rollouts of every checkpoint plus the greedy benchmark on the
/// same streams. Writes episode logs, scores.csv, summary.csv and
/// manifest.json into out_dir.
EvalResult run_eval(const EvalOptions& options);

/// Reads an eval directory and writes report.json, report.csv, table.csv,
/// deltas.csv, wilcoxon.csv and curves.csv into out_dir.
struct AnalyzeResult {
  std::size_t policies = 0;
  std::size_t comparisons = 0;
  std::size_t curve_rows = 0;
};
AnalyzeResult run_analyze(const fs::path& eval_dir, const fs::path& out_dir);

enum class PlotKind { line, bar };
PlotKind parse_plot_kind(const std::string& name);

/// SVG chart of a tidy CSV with the columns series,x,y (extra columns are
/// ignored).
void plot_csv(const fs::path& csv, const fs::path& svg, PlotKind kind, const std::string& title);

enum class Split { train, validation, test };
Split parse_split(const std::string& name);

/// Writes `count` streams of the split (default: the configured count; 1
/// for training) as <label>.stream files; returns the paths.
std::vector<fs::path> generate_streams(const RunConfig& cfg, Split split, std::optional<int> count,
                                       const fs::path& out_dir);

}  // namespace amod::cli
