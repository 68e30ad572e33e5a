#include "amod/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "amod/analysis/report.hpp"
#include "amod/analysis/scores.hpp"
#include "amod/analysis/wilcoxon.hpp"
#include "amod/dispatch.hpp"
#include "amod/episode_log.hpp"
#include "amod/training/trainer.hpp"

namespace amod::cli {
namespace {

using nlohmann::json;

std::string indexed(const std::string& prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix.c_str(), i);
  return buf;
}

std::string number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out << text;
    if (!out) throw RuntimeFailure("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Rows of a CSV file as header -> value maps.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split_csv_line(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = i < cells.size() ? cells[i] : "";
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Mean of the values seen so far; NaN when none.
struct Mean {
  double sum = 0.0;
  int n = 0;
  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  json value() const { return n > 0 ? json(sum / n) : json(nullptr); }
};

struct EpisodeAccumulator {
  Mean critic_local, critic_global, actor, entropy;
  int gradient_steps = 0;
  int agents = 0;

  void add(const StepMetrics& m) {
    critic_local.add(m.critic_loss_local);
    critic_global.add(m.critic_loss_global);
    actor.add(m.actor_loss);
    entropy.add(m.entropy);
    gradient_steps += m.gradient_step ? 1 : 0;
    agents += m.agents;
  }
};

/// Drops metric lines and validation rows recorded after `step`, so a
/// resumed run appends exactly what an uninterrupted one would have written.
void truncate_after(const fs::path& dir, std::int64_t step) {
  const fs::path metrics = dir / kMetricsFile;
  if (fs::exists(metrics)) {
    std::ifstream in(metrics);
    std::string line, kept;
    while (std::getline(in, line)) {
      const json j = json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.value("step", std::int64_t{0}) <= step) kept += line + "\n";
    }
    in.close();
    write_text(metrics, kept);
  }
  const fs::path validation = dir / kValidationFile;
  if (fs::exists(validation)) {
    std::ifstream in(validation);
    std::string line, kept;
    bool header = true;
    while (std::getline(in, line)) {
      if (header || std::stoll(split_csv_line(line).at(0)) <= step) kept += line + "\n";
      header = false;
    }
    in.close();
    write_text(validation, kept);
  }
}

json outcome_json(const SeedOutcome& o, std::int64_t total_steps) {
  return {{"seed", o.seed},
          {"status", o.ok ? "completed" : "failed"},
          {"message", o.message},
          {"steps", o.steps},
          {"total_steps", total_steps},
          {"best_validation", o.best_validation ? json(*o.best_validation) : json(nullptr)},
          {"best_step", o.best_step}};
}

std::vector<RequestStream> load_stream_dir(const fs::path& dir) {
  std::vector<RequestStream> out;
  for (const fs::path& p : stream_files(dir)) out.push_back(load_stream(p));
  return out;
}

std::vector<EpisodeLog> load_log_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("missing episode logs in " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("missing episode logs in " + dir.string());
  std::vector<EpisodeLog> logs;
  for (const fs::path& f : files) logs.push_back(load_episode_log(f));
  return logs;
}

std::optional<double> best_from_run(const fs::path& run_dir) {
  const fs::path summary = run_dir / kSummaryFile;
  if (fs::exists(summary)) {
    const json j = read_json(summary);
    if (j.contains("best_validation") && j["best_validation"].is_number()) return j["best_validation"].get<double>();
  }
  const fs::path validation = run_dir / kValidationFile;
  if (!fs::exists(validation)) return std::nullopt;
  std::optional<double> best;
  for (const auto& row : read_csv(validation)) {
    const double v = std::stod(row.at("score"));
    if (!best || v > *best) best = v;
  }
  return best;
}

}  // namespace

fs::path run_directory(const RunConfig& cfg, std::uint64_t seed) {
  return resolve_output_dir(cfg) / to_string(cfg.training.algorithm) / ("seed" + std::to_string(seed));
}

SeedOutcome train_seed(const RunConfig& cfg, std::uint64_t seed, const TrainOptions& options) {
  SeedOutcome out;
  out.seed = seed;
  out.directory = run_directory(cfg, seed);
  const fs::path& dir = out.directory;
  const fs::path ckpt_path = dir / kCheckpointFile;
  const fs::path summary_path = dir / kSummaryFile;

  RunConfig seed_cfg = cfg;
  seed_cfg.seeds = {seed};
  seed_cfg.training.seed = seed;
  const std::string config_text = to_json(seed_cfg).dump(2) + "\n";

  const bool existing = fs::exists(dir / kConfigFile) || fs::exists(dir / kMetricsFile) || fs::exists(ckpt_path);
  if (existing && !options.resume)
    throw ConfigError("run directory " + dir.string() + " already holds a run; resume it or remove it");
  if (existing) {
    if (fs::exists(dir / kConfigFile) && read_json(dir / kConfigFile) != to_json(seed_cfg))
      throw ConfigError("configuration differs from the run in " + dir.string());
    if (fs::exists(summary_path)) {
      const json s = read_json(summary_path);
      if (s.value("status", "") == "completed") {
        out.ok = true;
        out.message = "already completed";
        out.steps = s.value("steps", std::int64_t{0});
        if (s["best_validation"].is_number()) out.best_validation = s["best_validation"].get<double>();
        out.best_step = s.value("best_step", std::int64_t{0});
        return out;
      }
    }
  }
  fs::create_directories(dir);
  write_text(dir / kConfigFile, config_text);

  const EpisodeConfig instance = cfg.instance.build();
  std::vector<RequestStream> validation = validation_streams(cfg);
  check_streams(validation, instance);
  Trainer trainer(seed_cfg.training, instance, training_streams(cfg), std::move(validation));

  double best = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  std::int64_t best_step = 0;
  if (options.resume && fs::exists(ckpt_path)) {
    const nn::Checkpoint ckpt = nn::load_checkpoint(ckpt_path);
    trainer.restore(ckpt);
    have_best = ckpt.counters.at("run.has_best") != 0;
    best_step = ckpt.counters.at("run.best_step");
    if (have_best) best = ckpt.scalars.at("run.best_validation");
    truncate_after(dir, trainer.steps_done());
  } else {
    fs::remove(dir / kMetricsFile);
    fs::remove(dir / kValidationFile);
    fs::remove(summary_path);
  }
  if (!fs::exists(dir / kValidationFile)) write_text(dir / kValidationFile, "step,score\n");

  std::ofstream metrics(dir / kMetricsFile, std::ios::app);
  std::ofstream curve(dir / kValidationFile, std::ios::app);
  if (!metrics || !curve) throw RuntimeFailure("cannot open metrics files in " + dir.string());

  const TrainingConfig& tc = seed_cfg.training;
  std::int64_t last_checkpoint = trainer.steps_done();
  EpisodeAccumulator acc;
  const auto save_full_checkpoint = [&] {
    nn::Checkpoint c = trainer.checkpoint(true);
    c.counters["run.has_best"] = have_best ? 1 : 0;
    c.counters["run.best_step"] = best_step;
    c.scalars["run.best_validation"] = have_best ? best : 0.0;
    metrics.flush();
    curve.flush();
    nn::save_checkpoint(ckpt_path, c);
    last_checkpoint = trainer.steps_done();
  };

  try {
    while (!trainer.finished()) {
      const StepMetrics m = trainer.step();
      acc.add(m);
      const std::int64_t step = trainer.steps_done();
      if (m.episode_return) {
        metrics << json{{"event", "episode"},
                        {"step", step},
                        {"return", *m.episode_return},
                        {"agents", acc.agents},
                        {"gradient_steps", acc.gradient_steps},
                        {"critic_loss_local", acc.critic_local.value()},
                        {"critic_loss_global", acc.critic_global.value()},
                        {"actor_loss", acc.actor.value()},
                        {"entropy", acc.entropy.value()},
                        {"beta", m.beta},
                        {"kappa", m.kappa}}
                       .dump()
                << '\n';
        acc = {};
      }
      if (step % cfg.validation_interval == 0 || trainer.finished()) {
        const double score = trainer.validate();
        const bool improved = !have_best || score > best;
        if (improved) {
          best = score;
          best_step = step;
          have_best = true;
          nn::Checkpoint actor;
          Trainer::store_actor(actor, trainer.actor());
          actor.counters["step"] = step;
          actor.scalars["validation"] = score;
          nn::save_checkpoint(dir / kBestActorFile, actor);
        }
        metrics << json{{"event", "validation"}, {"step", step}, {"score", score}, {"best", best}}.dump() << '\n';
        curve << step << ',' << number(score) << '\n';
        if (options.progress != nullptr)
          *options.progress << to_string(tc.algorithm) << " seed " << seed << " step " << step << '/'
                            << tc.total_steps << " validation " << score << " best " << best << std::endl;
      }
      if (trainer.at_episode_boundary() &&
          (step - last_checkpoint >= cfg.checkpoint_interval || trainer.finished()))
        save_full_checkpoint();
    }
  } catch (const nn::NumericalError& e) {
    out.ok = false;
    out.message = std::string("numerical failure: ") + e.what();
    out.steps = trainer.steps_done();
    if (have_best) out.best_validation = best;
    out.best_step = best_step;
    write_text(summary_path, outcome_json(out, tc.total_steps).dump(2) + "\n");
    return out;
  }

  nn::Checkpoint final_actor;
  Trainer::store_actor(final_actor, trainer.actor());
  final_actor.counters["step"] = trainer.steps_done();
  nn::save_checkpoint(dir / kFinalActorFile, final_actor);

  out.ok = true;
  out.steps = trainer.steps_done();
  if (have_best) out.best_validation = best;
  out.best_step = best_step;
  write_text(summary_path, outcome_json(out, tc.total_steps).dump(2) + "\n");
  return out;
}

std::vector<SeedOutcome> train_all(const RunConfig& cfg, const TrainOptions& options) {
  std::vector<SeedOutcome> outcomes;
  for (const std::uint64_t seed : cfg.seeds) {
    try {
      outcomes.push_back(train_seed(cfg, seed, options));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      SeedOutcome o;
      o.seed = seed;
      o.directory = run_directory(cfg, seed);
      o.message = e.what();
      outcomes.push_back(std::move(o));
    }
  }
  return outcomes;
}

DryRunPlan plan_training(const RunConfig& cfg) {
  DryRunPlan p;
  p.config = to_json(cfg);
  p.seeds = cfg.seeds.size();
  const TrainingConfig& t = cfg.training;
  p.env_steps_per_seed = t.total_steps;
  p.gradient_steps_per_seed = std::max<std::int64_t>(0, t.total_steps - t.warmup_steps);
  p.total_env_steps = p.env_steps_per_seed * static_cast<std::int64_t>(p.seeds);
  switch (t.algorithm) {
    case Algorithm::COMAscd: p.critic_networks = 4; break;
    default: p.critic_networks = 2; break;
  }
  for (const std::uint64_t s : cfg.seeds) p.run_directories.push_back(run_directory(cfg, s).string());
  return p;
}

json to_json(const DryRunPlan& p) {
  return {{"config", p.config},
          {"seeds", p.seeds},
          {"env_steps_per_seed", p.env_steps_per_seed},
          {"gradient_steps_per_seed", p.gradient_steps_per_seed},
          {"total_env_steps", p.total_env_steps},
          {"critic_networks", p.critic_networks},
          {"run_directories", p.run_directories}};
}

EvalResult run_eval(const EvalOptions& options) {
  if (options.run_dirs.empty()) throw ConfigError("eval needs at least one run directory");
  const fs::path cfg_path = options.config ? *options.config : options.run_dirs.front() / kConfigFile;
  if (!fs::exists(cfg_path)) throw ConfigError("missing config " + cfg_path.string());
  const RunConfig cfg = load_run_config(cfg_path, options.overrides);
  const EpisodeConfig instance = cfg.instance.build();
  const FeatureDims dims = feature_dims(instance.grid.size());

  std::vector<RequestStream> streams = options.streams_dir ? load_stream_dir(*options.streams_dir) : test_streams(cfg);
  if (streams.empty()) throw ConfigError("no test streams");
  try {
    check_streams(streams, instance);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("stream/instance mismatch: ") + e.what());
  }

  EvalResult r;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    std::string label = streams[i].meta.date_label;
    if (std::find(r.dates.begin(), r.dates.end(), label) != r.dates.end()) label += "#" + std::to_string(i);
    r.dates.push_back(label);
  }

  const fs::path logs = options.out_dir / "logs";
  {
    const std::vector<RequestStream> validation = validation_streams(cfg);
    double total = 0.0;
    for (const RequestStream& s : validation) {
      GreedyPolicy greedy;
      total += rollout(greedy, instance, s).total_profit;
    }
    r.greedy_validation = validation.empty() ? 0.0 : total / static_cast<double>(validation.size());
  }
  for (std::size_t i = 0; i < streams.size(); ++i) {
    GreedyPolicy greedy;
    const EpisodeLog log = rollout(greedy, instance, streams[i]);
    save_episode_log(logs / "greedy" / "seed0" / (indexed("", i) + ".jsonl"), log);
    r.greedy.push_back(log.total_profit);
  }

  const json instance_json = to_json(cfg)["instance"];
  for (const fs::path& run_dir : options.run_dirs) {
    const fs::path run_cfg_path = run_dir / kConfigFile;
    if (!fs::exists(run_cfg_path)) throw ConfigError(run_dir.string() + " is not a run directory (no config.json)");
    const RunConfig run_cfg = load_run_config(run_cfg_path);
    if (to_json(run_cfg)["instance"] != instance_json)
      throw ConfigError("run " + run_dir.string() + " was trained on a different instance");
    const fs::path ckpt = run_dir / options.checkpoint;
    if (!fs::exists(ckpt)) throw ConfigError("missing checkpoint " + ckpt.string());
    nn::ActorNet actor = Trainer::load_actor(nn::load_checkpoint(ckpt));
    if (!(actor.dims() == dims)) throw ConfigError("checkpoint " + ckpt.string() + " does not fit the instance");

    EvalRun run;
    run.policy = to_string(run_cfg.training.algorithm);
    run.seed = run_cfg.seeds.front();
    run.run_dir = fs::absolute(run_dir);
    run.validation_best = best_from_run(run_dir);
    for (std::size_t i = 0; i < streams.size(); ++i) {
      ActorPolicy policy(actor, ScoreMode::test, 0, run.policy);
      const EpisodeLog log = rollout(policy, instance, streams[i]);
      save_episode_log(logs / run.policy / ("seed" + std::to_string(run.seed)) / (indexed("", i) + ".jsonl"), log);
      run.profits.push_back(log.total_profit);
    }
    for (const EvalRun& other : r.runs)
      if (other.policy == run.policy && other.seed == run.seed)
        throw ConfigError("run " + run.policy + "/seed" + std::to_string(run.seed) + " listed twice");
    r.runs.push_back(std::move(run));
  }

  std::ostringstream scores;
  scores << "policy,seed,date,profit\n";
  for (std::size_t d = 0; d < r.dates.size(); ++d) scores << "greedy,0," << r.dates[d] << ',' << number(r.greedy[d]) << '\n';
  for (const EvalRun& run : r.runs)
    for (std::size_t d = 0; d < r.dates.size(); ++d)
      scores << run.policy << ',' << run.seed << ',' << r.dates[d] << ',' << number(run.profits[d]) << '\n';
  write_text(options.out_dir / "scores.csv", scores.str());

  std::vector<RunScores> runs;
  for (const EvalRun& run : r.runs) runs.push_back({run.policy, run.seed, run.profits, run.validation_best});
  AggregateOptions agg;
  agg.greedy_validation = r.greedy_validation;
  std::ostringstream summary;
  try {
    const ScoreTable t = aggregate_scores(r.dates, "greedy", r.greedy, runs, agg);
    summary << "date";
    for (const auto& c : t.columns) summary << ',' << c;
    for (std::size_t c = 1; c < t.columns.size(); ++c) summary << ',' << t.columns[c] << "_delta_pct";
    summary << '\n';
    const auto row = [&](const std::string& label, const std::vector<double>& v, const std::vector<double>& dp) {
      summary << label;
      for (double x : v) summary << ',' << number(x);
      for (std::size_t c = 1; c < v.size(); ++c) summary << ',' << number(dp[c]);
      summary << '\n';
    };
    for (std::size_t d = 0; d < t.dates.size(); ++d) row(t.dates[d], t.values[d], t.delta_percent[d]);
    row("mean", t.column_means, t.column_delta_percent);
  } catch (const std::invalid_argument& e) {
    summary << "error," << e.what() << '\n';
  }
  write_text(options.out_dir / "summary.csv", summary.str());

  json manifest = {{"dates", r.dates},
                   {"greedy", r.greedy},
                   {"greedy_validation", r.greedy_validation},
                   {"greedy_logs", "logs/greedy/seed0"},
                   {"runs", json::array()}};
  for (const EvalRun& run : r.runs)
    manifest["runs"].push_back({{"policy", run.policy},
                                {"seed", run.seed},
                                {"run_dir", run.run_dir.string()},
                                {"validation_best", run.validation_best ? json(*run.validation_best) : json(nullptr)},
                                {"profits", run.profits},
                                {"logs", "logs/" + run.policy + "/seed" + std::to_string(run.seed)}});
  write_text(options.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return r;
}

AnalyzeResult run_analyze(const fs::path& eval_dir, const fs::path& out_dir) {
  const fs::path manifest_path = eval_dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw ConfigError("missing eval manifest " + manifest_path.string());
  const json manifest = read_json(manifest_path);
  const auto dates = manifest.at("dates").get<std::vector<std::string>>();
  const auto greedy = manifest.at("greedy").get<std::vector<double>>();
  const double greedy_validation = manifest.at("greedy_validation").get<double>();

  std::vector<std::string> policies;
  std::map<std::string, std::vector<std::vector<EpisodeLog>>> logs;
  std::vector<RunScores> runs;
  for (const json& run : manifest.at("runs")) {
    const std::string policy = run.at("policy");
    if (!logs.count(policy)) policies.push_back(policy);
    logs[policy].push_back(load_log_dir(eval_dir / run.at("logs").get<std::string>()));
    RunScores s{policy, run.at("seed").get<std::uint64_t>(), run.at("profits").get<std::vector<double>>(), std::nullopt};
    if (run.at("validation_best").is_number()) s.validation_best = run["validation_best"].get<double>();
    runs.push_back(std::move(s));
  }

  std::vector<PolicyReport> reports;
  reports.push_back(build_policy_report("greedy", {load_log_dir(eval_dir / manifest.at("greedy_logs").get<std::string>())}));
  for (const std::string& p : policies) reports.push_back(build_policy_report(p, logs[p]));
  json report_json = json::array();
  for (const PolicyReport& r : reports) report_json.push_back(to_json(r));

  std::ostringstream report_csv;
  write_report_csv(report_csv, reports);
  write_text(out_dir / "report.csv", report_csv.str());

  AggregateOptions agg;
  agg.greedy_validation = greedy_validation;
  const ScoreTable table = aggregate_scores(dates, "greedy", greedy, runs, agg);

  std::ostringstream table_csv, deltas;
  table_csv << "date,policy,seeds,value,delta_pct\n";
  deltas << "series,x,y,date\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const std::size_t seeds = c == 0 ? 1 : table.seeds[c].size();
    for (std::size_t d = 0; d < dates.size(); ++d) {
      table_csv << dates[d] << ',' << table.columns[c] << ',' << seeds << ',' << number(table.values[d][c]) << ','
                << number(table.delta_percent[d][c]) << '\n';
      if (c > 0)
        deltas << table.columns[c] << ',' << d << ',' << number(table.delta_percent[d][c]) << ',' << dates[d] << '\n';
    }
    table_csv << "mean," << table.columns[c] << ',' << seeds << ',' << number(table.column_means[c]) << ','
              << number(table.column_delta_percent[c]) << '\n';
  }
  write_text(out_dir / "table.csv", table_csv.str());
  write_text(out_dir / "deltas.csv", deltas.str());

  AnalyzeResult result;
  result.policies = policies.size();
  std::ostringstream wilcoxon;
  wilcoxon << "a,b,n,statistic,w_plus,w_minus,p_value,exact,warnings\n";
  for (std::size_t a = 1; a < table.columns.size(); ++a) {
    for (std::size_t b = a + 1; b < table.columns.size(); ++b) {
      std::vector<std::pair<double, double>> pairs;
      for (std::size_t d = 0; d < dates.size(); ++d) pairs.emplace_back(table.values[d][a], table.values[d][b]);
      wilcoxon << table.columns[a] << ',' << table.columns[b] << ',';
      if (pairs.size() < kWilcoxonMinPairs) {
        wilcoxon << pairs.size() << ",,,,,,fewer than " << kWilcoxonMinPairs << " dates\n";
        continue;
      }
      const WilcoxonResult w = wilcoxon_signed_rank(pairs);
      std::string warnings;
      for (const auto& s : w.warnings) warnings += (warnings.empty() ? "" : "; ") + s;
      wilcoxon << w.n << ',' << number(w.statistic) << ',' << number(w.w_plus) << ',' << number(w.w_minus) << ','
               << number(w.p_value) << ',' << (w.exact ? "true" : "false") << ',' << warnings << '\n';
      ++result.comparisons;
    }
  }
  write_text(out_dir / "wilcoxon.csv", wilcoxon.str());

  std::ostringstream curves;
  curves << "series,x,y\n";
  for (const json& run : manifest.at("runs")) {
    const fs::path file = fs::path(run.at("run_dir").get<std::string>()) / kValidationFile;
    if (!fs::exists(file)) continue;
    const std::string series = run.at("policy").get<std::string>() + "/seed" + std::to_string(run.at("seed").get<std::uint64_t>());
    for (const auto& row : read_csv(file)) {
      curves << series << ',' << row.at("step") << ',' << row.at("score") << '\n';
      ++result.curve_rows;
    }
  }
  write_text(out_dir / "curves.csv", curves.str());

  json analysis = {{"reports", report_json},
                   {"columns", table.columns},
                   {"column_means", table.column_means},
                   {"column_delta_pct", table.column_delta_percent},
                   {"excluded_runs", table.excluded},
                   {"greedy_validation", greedy_validation}};
  write_text(out_dir / "report.json", analysis.dump(2) + "\n");
  return result;
}

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "line") return PlotKind::line;
  if (name == "bar") return PlotKind::bar;
  throw ConfigError("unknown plot kind '" + name + "'");
}

void plot_csv(const fs::path& csv, const fs::path& svg, PlotKind kind, const std::string& title) {
  const auto rows = read_csv(csv);
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& row : rows) {
    const auto s = row.find("series"), x = row.find("x"), y = row.find("y");
    if (s == row.end() || x == row.end() || y == row.end()) throw ConfigError(csv.string() + " needs series,x,y columns");
    if (y->second.empty()) continue;
    if (!series.count(s->second)) names.push_back(s->second);
    series[s->second].emplace_back(std::stod(x->second), std::stod(y->second));
  }
  if (names.empty()) throw ConfigError(csv.string() + " holds no data rows");

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& [name, pts] : series)
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (kind == PlotKind::bar) y0 = std::min(y0, 0.0), y1 = std::max(y1, 0.0), x0 -= 0.5, x1 += 0.5;
  if (x1 == x0) x0 -= 1, x1 += 1;
  if (y1 == y0) y0 -= 1, y1 += 1;

  const double W = 720, H = 420, L = 70, R = 160, T = 40, B = 50;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream s;
  s << std::setprecision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y0 + (y1 - y0) * i / 4.0, xv = x0 + (x1 - x0) * i / 4.0;
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
    s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
  }
  if (kind == PlotKind::bar && y0 < 0 && y1 > 0)
    s << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0) << "\" stroke=\"#888\"/>\n";

  const double slot = (W - L - R) / std::max(1.0, x1 - x0);
  const double bar_width = 0.8 * slot / static_cast<double>(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    const char* color = palette[k % 10];
    auto pts = series[names[k]];
    std::sort(pts.begin(), pts.end());
    if (kind == PlotKind::line) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : pts) s << px(x) << ',' << py(y) << ' ';
      s << "\"/>\n";
    } else {
      for (const auto& [x, y] : pts) {
        const double left = px(x) - 0.4 * slot + static_cast<double>(k) * bar_width;
        const double top = std::min(py(y), py(0)), height = std::abs(py(y) - py(0));
        s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << bar_width << "\" height=\"" << height
          << "\" fill=\"" << color << "\"/>\n";
      }
    }
    const double ly = T + 16 * static_cast<double>(k);
    s << "<rect x=\"" << W - R + 12 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    s << "<text x=\"" << W - R + 28 << "\" y=\"" << ly + 9 << "\">" << names[k] << "</text>\n";
  }
  s << "</svg>\n";
  write_text(svg, s.str());
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + name + "'");
}

std::vector<fs::path> generate_streams(const RunConfig& cfg, Split split, std::optional<int> count,
                                       const fs::path& out_dir) {
  std::vector<RequestStream> streams;
  if (split == Split::train) {
    const StreamProvider provider = training_streams(cfg);
    const int n = count.value_or(1);
    for (int i = 0; i < n; ++i) {
      streams.push_back(provider(static_cast<std::uint64_t>(i)));
      streams.back().meta.date_label = indexed("train-", static_cast<std::size_t>(i));
    }
  } else {
    streams = split == Split::validation ? validation_streams(cfg) : test_streams(cfg);
    if (count) {
      if (*count < 0) throw ConfigError("count must be non-negative");
      if (static_cast<std::size_t>(*count) > streams.size()) {
        RunConfig more = cfg;
        (split == Split::validation ? more.data.validation_streams : more.data.test_streams) = *count;
        streams = split == Split::validation ? validation_streams(more) : test_streams(more);
      }
      streams.resize(static_cast<std::size_t>(*count));
    }
  }
  std::vector<fs::path> paths;
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < streams.size(); ++i) {
    std::string name = streams[i].meta.date_label;
    if (name.empty() || name.find('/') != std::string::npos) name = indexed("stream-", i);
    const fs::path p = out_dir / (name + ".stream");
    save_stream(p, streams[i]);
    paths.push_back(p);
  }
  return paths;
}

}  // namespace amod::cli
