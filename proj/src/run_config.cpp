#include "amod/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

namespace amod {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key = {}) const {
    const std::string p = path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
    return p.empty() ? "config" : "'" + p + "'";
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw ConfigError("unknown config key " + where(key));
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto checked(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string placement_name(PlacementRule p) { return p == PlacementRule::fixed ? "fixed" : "uniform_random"; }

PlacementRule parse_placement(const std::string& s) {
  if (s == "fixed") return PlacementRule::fixed;
  if (s == "uniform_random") return PlacementRule::uniform_random;
  throw ConfigError("unknown placement '" + s + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base * 0x9e3779b97f4a7c15ULL + index + 1;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<RequestStream> load_dir(const fs::path& dir) {
  std::vector<RequestStream> out;
  for (const fs::path& p : stream_files(dir)) out.push_back(load_stream(p));
  return out;
}

std::vector<RequestStream> synth_set(const RunConfig& cfg, const std::string& label, std::uint64_t first_seed,
                                     int count) {
  const ZoneGrid grid = build_hex_grid(cfg.instance.zones, cfg.instance.scale);
  SynthSpec spec = cfg.data.synth;
  std::vector<RequestStream> out;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%s-%03d", label.c_str(), i);
    spec.date_label = name;
    out.push_back(synth_stream(grid, spec, first_seed + static_cast<std::uint64_t>(i)));
  }
  return out;
}

}  // namespace

EpisodeConfig InstanceSpec::build() const {
  EpisodeConfig c;
  c.grid = build_hex_grid(zones, scale);
  c.n_vehicles = vehicles;
  c.max_wait_steps = max_wait_steps;
  c.episode_length = episode_length;
  c.revenue_per_km = revenue_per_km;
  c.cost_per_km = cost_per_km;
  c.placement = placement;
  c.fixed_positions = fixed_positions;
  c.placement_seed = placement_seed;
  c.validate();
  return c;
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  RunConfig cfg;
  ObjectReader root(doc, "");

  if (const json* inst = root.child("instance")) {
    ObjectReader r(*inst, "instance");
    InstanceSpec& s = cfg.instance;
    std::string scale = to_string(s.scale), placement = placement_name(s.placement);
    r.get("zones", s.zones);
    r.get("scale", scale);
    r.get("vehicles", s.vehicles);
    r.get("max_wait_steps", s.max_wait_steps);
    r.get("episode_length", s.episode_length);
    r.get("revenue_per_km", s.revenue_per_km);
    r.get("cost_per_km", s.cost_per_km);
    r.get("placement", placement);
    r.get("fixed_positions", s.fixed_positions);
    r.get("placement_seed", s.placement_seed);
    r.finish();
    s.scale = checked("instance.scale", [&] { return parse_zone_scale(scale); });
    s.placement = parse_placement(placement);
  }

  if (const json* tr = root.child("training")) {
    ObjectReader r(*tr, "training");
    TrainingConfig& t = cfg.training;
    std::string algorithm = to_string(t.algorithm), beta = to_string(t.beta_schedule),
                kappa = to_string(t.kappa_schedule);
    std::size_t capacity = t.buffer_capacity;
    r.get("algorithm", algorithm);
    r.get("alpha", t.alpha);
    r.get("gamma", t.gamma);
    r.get("lr_actor", t.lr_actor);
    r.get("lr_critic", t.lr_critic);
    r.get("batch_size", t.batch_size);
    r.get("buffer_capacity", capacity);
    r.get("warmup_steps", t.warmup_steps);
    r.get("tau", t.tau);
    r.get("lgra_global_share", t.lgra_global_share);
    r.get("beta_schedule", beta);
    r.get("kappa_schedule", kappa);
    r.get("total_steps", t.total_steps);
    r.get("reward_scale", t.reward_scale);
    if (const json* net = r.child("network")) {
      ObjectReader n(*net, "training.network");
      n.get("embed", t.network.embed);
      n.get("hidden", t.network.hidden);
      n.get("attention", t.network.attention);
      n.finish();
    }
    r.finish();
    t.buffer_capacity = capacity;
    t.algorithm = checked("training.algorithm", [&] { return parse_algorithm(algorithm); });
    t.beta_schedule = checked("training.beta_schedule", [&] { return parse_schedule(beta); });
    t.kappa_schedule = checked("training.kappa_schedule", [&] { return parse_schedule(kappa); });
  }

  root.get("seeds", cfg.seeds);

  if (const json* data = root.child("data")) {
    ObjectReader r(*data, "data");
    DataSpec& d = cfg.data;
    std::string source = to_string(d.source), train_dir, validation_dir, test_dir;
    r.get("source", source);
    r.get("rate_per_step", d.synth.rate_per_step);
    r.get("destination_weights", d.synth.destination_weights);
    r.get("train_seed", d.train_seed);
    r.get("validation_seed", d.validation_seed);
    r.get("test_seed", d.test_seed);
    r.get("validation_streams", d.validation_streams);
    r.get("test_streams", d.test_streams);
    r.get("train_dir", train_dir);
    r.get("validation_dir", validation_dir);
    r.get("test_dir", test_dir);
    r.finish();
    d.source = checked("data.source", [&] { return parse_stream_source(source); });
    d.train_dir = resolve(base_dir, train_dir);
    d.validation_dir = resolve(base_dir, validation_dir);
    d.test_dir = resolve(base_dir, test_dir);
  }

  std::string output_dir = cfg.output_dir.string();
  root.get("output_dir", output_dir);
  root.get("validation_interval", cfg.validation_interval);
  root.get("checkpoint_interval", cfg.checkpoint_interval);
  root.finish();
  cfg.output_dir = output_dir;

  // Cross-field checks.
  cfg.data.synth.episode_length = cfg.instance.episode_length;
  checked("instance", [&] { return cfg.instance.build(); });
  checked("training", [&] { cfg.training.validate(); return 0; });
  if (cfg.seeds.empty()) throw ConfigError("'seeds' must list at least one seed");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
    throw ConfigError("'seeds' must not repeat");
  if (cfg.validation_interval < 1) throw ConfigError("'validation_interval' must be positive");
  if (cfg.checkpoint_interval < 1) throw ConfigError("'checkpoint_interval' must be positive");
  const DataSpec& d = cfg.data;
  if (d.source == StreamSource::synthetic) {
    if (d.synth.rate_per_step.size() != static_cast<std::size_t>(cfg.instance.zones))
      throw ConfigError("'data.rate_per_step' needs one rate per zone");
    for (double r : d.synth.rate_per_step)
      if (!(r >= 0.0)) throw ConfigError("'data.rate_per_step' must be non-negative");
    if (!d.synth.destination_weights.empty()) {
      if (d.synth.destination_weights.size() != d.synth.rate_per_step.size())
        throw ConfigError("'data.destination_weights' needs one row per zone");
      for (const auto& row : d.synth.destination_weights)
        if (row.size() != d.synth.rate_per_step.size())
          throw ConfigError("'data.destination_weights' rows need one weight per zone");
    }
    if (d.validation_streams < 1 || d.test_streams < 1)
      throw ConfigError("'data.validation_streams' and 'data.test_streams' must be positive");
  } else {
    for (const auto& [key, dir] : {std::pair{"train_dir", d.train_dir}, std::pair{"validation_dir", d.validation_dir},
                                   std::pair{"test_dir", d.test_dir}}) {
      if (dir.empty()) throw ConfigError(std::string("'data.") + key + "' is required for historical data");
      if (!fs::is_directory(dir)) throw ConfigError(std::string("'data.") + key + "' does not exist: " + dir.string());
      if (stream_files(dir).empty())
        throw ConfigError(std::string("'data.") + key + "' holds no .stream files: " + dir.string());
    }
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const InstanceSpec& s = cfg.instance;
  const TrainingConfig& t = cfg.training;
  const DataSpec& d = cfg.data;
  json data = {{"source", to_string(d.source)}};
  if (d.source == StreamSource::synthetic) {
    data["rate_per_step"] = d.synth.rate_per_step;
    data["destination_weights"] = d.synth.destination_weights;
    data["train_seed"] = d.train_seed;
    data["validation_seed"] = d.validation_seed;
    data["test_seed"] = d.test_seed;
    data["validation_streams"] = d.validation_streams;
    data["test_streams"] = d.test_streams;
  } else {
    data["train_dir"] = d.train_dir.string();
    data["validation_dir"] = d.validation_dir.string();
    data["test_dir"] = d.test_dir.string();
  }
  return {
      {"instance",
       {{"zones", s.zones},
        {"scale", to_string(s.scale)},
        {"vehicles", s.vehicles},
        {"max_wait_steps", s.max_wait_steps},
        {"episode_length", s.episode_length},
        {"revenue_per_km", s.revenue_per_km},
        {"cost_per_km", s.cost_per_km},
        {"placement", placement_name(s.placement)},
        {"fixed_positions", s.fixed_positions},
        {"placement_seed", s.placement_seed}}},
      {"training",
       {{"algorithm", to_string(t.algorithm)},
        {"alpha", t.alpha},
        {"gamma", t.gamma},
        {"lr_actor", t.lr_actor},
        {"lr_critic", t.lr_critic},
        {"batch_size", t.batch_size},
        {"buffer_capacity", t.buffer_capacity},
        {"warmup_steps", t.warmup_steps},
        {"tau", t.tau},
        {"lgra_global_share", t.lgra_global_share},
        {"beta_schedule", to_string(t.beta_schedule)},
        {"kappa_schedule", to_string(t.kappa_schedule)},
        {"total_steps", t.total_steps},
        {"reward_scale", t.reward_scale},
        {"network", {{"embed", t.network.embed}, {"hidden", t.network.hidden}, {"attention", t.network.attention}}}}},
      {"seeds", cfg.seeds},
      {"data", data},
      {"output_dir", cfg.output_dir.string()},
      {"validation_interval", cfg.validation_interval},
      {"checkpoint_interval", cfg.checkpoint_interval},
  };
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig load_run_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc = json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  for (const std::string& o : overrides) apply_override(doc, o);
  return parse_run_config(doc, path.parent_path());
}

fs::path resolve_output_dir(const RunConfig& cfg) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root != nullptr && *root != '\0' && cfg.output_dir.is_relative()) return fs::path(root) / cfg.output_dir;
  return cfg.output_dir;
}

StreamProvider training_streams(const RunConfig& cfg) {
  if (cfg.data.source == StreamSource::synthetic) {
    const ZoneGrid grid = build_hex_grid(cfg.instance.zones, cfg.instance.scale);
    const SynthSpec spec = cfg.data.synth;
    const std::uint64_t base = cfg.data.train_seed;
    return [grid, spec, base](std::uint64_t episode) { return synth_stream(grid, spec, stream_seed(base, episode)); };
  }
  auto streams = std::make_shared<std::vector<RequestStream>>(load_dir(cfg.data.train_dir));
  return [streams](std::uint64_t episode) { return (*streams)[episode % streams->size()]; };
}

std::vector<RequestStream> validation_streams(const RunConfig& cfg) {
  if (cfg.data.source == StreamSource::synthetic)
    return synth_set(cfg, "validation", cfg.data.validation_seed, cfg.data.validation_streams);
  return load_dir(cfg.data.validation_dir);
}

std::vector<RequestStream> test_streams(const RunConfig& cfg) {
  if (cfg.data.source == StreamSource::synthetic) return synth_set(cfg, "test", cfg.data.test_seed, cfg.data.test_streams);
  return load_dir(cfg.data.test_dir);
}

std::vector<fs::path> stream_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".stream") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void check_streams(const std::vector<RequestStream>& streams, const EpisodeConfig& instance) {
  for (const RequestStream& s : streams) {
    if (s.meta.n_zones != 0 && s.meta.n_zones != static_cast<int>(instance.grid.size()))
      throw std::invalid_argument("stream '" + s.meta.date_label + "' has " + std::to_string(s.meta.n_zones) +
                                  " zones, instance has " + std::to_string(instance.grid.size()));
    if (s.meta.episode_length != instance.episode_length)
      throw std::invalid_argument("stream '" + s.meta.date_label + "' has episode length " +
                                  std::to_string(s.meta.episode_length) + ", instance has " +
                                  std::to_string(instance.episode_length));
    const auto problems = validate_stream(s, 0);
    if (!problems.empty()) throw std::invalid_argument("stream '" + s.meta.date_label + "': " + problems.front());
  }
}

}  // namespace amod
