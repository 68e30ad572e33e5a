// Command-line entry point: gen-data, ingest, train, eval, analyze, plot.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "amod/cli/commands.hpp"
#include "amod/data.hpp"
#include "amod/grid.hpp"

namespace {

using namespace amod;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int fail(int code, const std::string& kind, const std::string& message) {
  std::cerr << "amod: error kind=" << kind << " message=" << json(one_line(message)).dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profit-maximizing AMoD dispatch: data, training, evaluation and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* gen = app.add_subcommand("gen-data", "Write synthetic (or configured) request streams");
  std::string split = "test", gen_out;
  std::optional<int> gen_count;
  gen->add_option("config", config_path, "Run config (JSON)")->required();
  gen->add_option("--set", overrides, "Override a config key: key=value");
  gen->add_option("--split", split, "train | validation | test")->capture_default_str();
  gen->add_option("--count", gen_count, "Number of streams");
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* ingest = app.add_subcommand("ingest", "Turn a trip-record table into a request stream");
  std::string trips, ingest_out, date, scale = "small", holidays_file;
  int zones = 5, hour = 0, subsample = 1, episode_length = 60;
  ingest->add_option("trips", trips, "Delimited trip-record table")->required()->check(CLI::ExistingFile);
  ingest->add_option("--zones", zones, "Zone layout (5, 11 or 38)")->capture_default_str();
  ingest->add_option("--scale", scale, "small | large")->capture_default_str();
  ingest->add_option("--date", date, "Day to extract (YYYY-MM-DD)")->required();
  ingest->add_option("--hour", hour, "Hour of day (0-23)")->required()->check(CLI::Range(0, 23));
  ingest->add_option("--subsample", subsample, "Keep every k-th in-area record")->capture_default_str();
  ingest->add_option("--episode-length", episode_length, "Steps per episode")->capture_default_str();
  ingest->add_option("--holidays", holidays_file, "File with one YYYY-MM-DD holiday per line")
      ->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Output .stream file")->required();

  auto* train = app.add_subcommand("train", "Train every configured seed");
  bool resume = false, dry_run = false, quiet = false;
  train->add_option("config", config_path, "Run config (JSON)")->required();
  train->add_option("--set", overrides, "Override a config key: key=value");
  train->add_flag("--resume", resume, "Continue interrupted runs from their last checkpoint");
  train->add_flag("--dry-run", dry_run, "Print the resolved config and step counts, do not train");
  train->add_flag("--quiet", quiet, "No progress lines");

  auto* eval = app.add_subcommand("eval", "Test-mode rollouts of trained runs plus the greedy benchmark");
  cli::EvalOptions eval_opts;
  std::string eval_config, eval_streams, eval_out;
  eval->add_option("runs", eval_opts.run_dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--config", eval_config, "Config for instance and test streams (default: first run's)")
      ->check(CLI::ExistingFile);
  eval->add_option("--set", eval_opts.overrides, "Override a config key: key=value");
  eval->add_option("--streams", eval_streams, "Directory of .stream files to test on")->check(CLI::ExistingDirectory);
  eval->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint file inside each run")->capture_default_str();
  eval->add_option("--out", eval_out, "Output directory")->required();

  auto* analyze = app.add_subcommand("analyze", "Reports, score tables, Wilcoxon tests and curves from an eval");
  std::string eval_dir, analyze_out;
  analyze->add_option("eval_dir", eval_dir, "Eval output directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--out", analyze_out, "Output directory (default: the eval directory)");

  auto* plot = app.add_subcommand("plot", "SVG chart of a series,x,y table");
  std::string plot_csv, plot_out, plot_kind = "line", plot_title;
  plot->add_option("csv", plot_csv, "Tidy CSV (series,x,y)")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output .svg")->required();
  plot->add_option("--kind", plot_kind, "line | bar")->capture_default_str();
  plot->add_option("--title", plot_title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, "usage", e.what());
  }

  try {
    if (*gen) {
      const RunConfig cfg = load_run_config(config_path, overrides);
      const auto paths = cli::generate_streams(cfg, cli::parse_split(split), gen_count, gen_out);
      std::cout << json{{"written", paths.size()}, {"dir", gen_out}}.dump() << '\n';
    } else if (*ingest) {
      const ZoneGrid grid = build_hex_grid(zones, parse_zone_scale(scale));
      IngestOptions opts;
      opts.date = date;
      opts.hour = hour;
      opts.subsample_every = subsample;
      opts.episode_length = episode_length;
      if (!holidays_file.empty()) {
        opts.holidays.clear();
        std::ifstream in(holidays_file);
        for (std::string line; std::getline(in, line);)
          if (!line.empty()) opts.holidays.push_back(line);
      }
      std::ifstream table(trips);
      if (!table) throw ConfigError("cannot open " + trips);
      const IngestReport r = ingest_trips(table, grid, opts);
      save_stream(ingest_out, r.stream);
      std::cout << json{{"requests", r.stream.requests.size()},
                        {"rows", r.rows},
                        {"unparseable", r.unparseable},
                        {"outside_window", r.outside_window},
                        {"outside_area", r.outside_area},
                        {"intra_zone", r.intra_zone},
                        {"subsampled_out", r.subsampled_out},
                        {"warnings", r.warnings}}
                       .dump()
                << '\n';
    } else if (*train) {
      const RunConfig cfg = load_run_config(config_path, overrides);
      if (dry_run) {
        std::cout << to_json(cli::plan_training(cfg)).dump(2) << '\n';
        return 0;
      }
      cli::TrainOptions opts;
      opts.resume = resume;
      opts.progress = quiet ? nullptr : &std::cerr;
      const auto outcomes = cli::train_all(cfg, opts);
      bool all_ok = true;
      for (const auto& o : outcomes) {
        std::cout << json{{"seed", o.seed},
                          {"dir", o.directory.string()},
                          {"ok", o.ok},
                          {"steps", o.steps},
                          {"best_validation", o.best_validation ? json(*o.best_validation) : json(nullptr)},
                          {"message", o.message}}
                         .dump()
                  << '\n';
        all_ok = all_ok && o.ok;
      }
      if (!all_ok) return fail(kExitRuntime, "runtime", "one or more seeds failed");
    } else if (*eval) {
      if (!eval_config.empty()) eval_opts.config = eval_config;
      if (!eval_streams.empty()) eval_opts.streams_dir = eval_streams;
      eval_opts.out_dir = eval_out;
      const cli::EvalResult r = cli::run_eval(eval_opts);
      std::cout << json{{"dates", r.dates.size()}, {"runs", r.runs.size()}, {"out", eval_out}}.dump() << '\n';
    } else if (*analyze) {
      const auto r = cli::run_analyze(eval_dir, analyze_out.empty() ? eval_dir : analyze_out);
      std::cout << json{{"policies", r.policies}, {"comparisons", r.comparisons}, {"curve_rows", r.curve_rows}}.dump()
                << '\n';
    } else if (*plot) {
      cli::plot_csv(plot_csv, plot_out, cli::parse_plot_kind(plot_kind), plot_title);
    }
  } catch (const ConfigError& e) {
    return fail(kExitConfig, "config", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitConfig, "config", e.what());
  } catch (const std::exception& e) {
    return fail(kExitRuntime, "runtime", e.what());
  }
  return 0;
}
