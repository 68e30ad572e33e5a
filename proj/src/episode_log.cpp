#include "amod/episode_log.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace amod {
namespace {

using nlohmann::json;

class Fnv1a {
 public:
  void add(std::int64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= static_cast<std::uint64_t>((v >> (8 * i)) & 0xFF);
      h_ *= 0x100000001B3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

VehicleSnapshot snapshot(const Vehicle& v) {
  return {v.id, v.zone, v.next_zone, v.steps_to_next, static_cast<int>(v.itinerary.size())};
}

StepLog begin_step(const SimState& state, bool drain) {
  StepLog log;
  log.step = state.step;
  log.drain = drain;
  log.state_digest = state_digest(state);
  for (const auto& v : state.vehicles) log.vehicles.push_back(snapshot(v));
  for (const auto& r : state.open_requests) log.open_requests.push_back(r.id);
  return log;
}

void absorb(StepLog& log, const StepResult& result) {
  log.agent_profits = result.agent_profits;
  log.global_profit = result.global_profit;
  log.rejected = result.rejected;
  log.pickups = result.pickups;
  log.dropoffs = result.dropoffs;
}

json to_json(const ServiceEvent& e) { return json::array({e.request, e.vehicle, e.step}); }
ServiceEvent event_from(const json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}
template <typename T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

RequestStatus parse_status(const std::string& s) {
  for (auto st : {RequestStatus::pending, RequestStatus::assigned, RequestStatus::in_vehicle,
                  RequestStatus::completed, RequestStatus::rejected})
    if (to_string(st) == s) return st;
  throw std::runtime_error("episode log: unknown request status '" + s + "'");
}

}  // namespace

std::size_t EpisodeLog::accepted_count() const {
  return static_cast<std::size_t>(std::count_if(
      requests.begin(), requests.end(), [](const RequestOutcome& r) { return r.vehicle.has_value(); }));
}

std::string state_digest(const SimState& state) {
  Fnv1a h;
  h.add(state.step);
  for (const auto& v : state.vehicles) {
    h.add(v.id);
    h.add(v.zone);
    h.add(v.next_zone);
    h.add(v.steps_to_next);
    for (const auto& j : v.itinerary) {
      h.add(j.request);
      h.add(j.pickup);
      h.add(j.dropoff);
      h.add(j.picked_up ? 1 : 0);
    }
    h.add(-1);
  }
  for (const auto& r : state.open_requests) {
    h.add(r.id);
    h.add(r.origin);
    h.add(r.destination);
    h.add(r.placement_step);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

EpisodeLog rollout(DispatchPolicy& policy, const EpisodeConfig& cfg, const RequestStream& stream) {
  EpisodeLog log;
  auto& hdr = log.header;
  hdr.schema_version = kEpisodeLogSchemaVersion;
  hdr.policy = policy.name();
  hdr.date_label = stream.meta.date_label;
  hdr.stream_seed = stream.meta.seed;
  for (std::size_t z = 0; z < cfg.grid.size(); ++z)
    hdr.zones.push_back(cfg.grid.coord(static_cast<ZoneId>(z)));
  hdr.neighbor_distance_m = cfg.grid.neighbor_distance_m();
  hdr.steps_between_neighbors = cfg.grid.steps_between_neighbors();
  hdr.n_vehicles = cfg.n_vehicles;
  hdr.revenue_per_km = cfg.revenue_per_km;
  hdr.cost_per_km = cfg.cost_per_km;
  hdr.max_wait_steps = cfg.max_wait_steps;
  hdr.episode_length = cfg.episode_length;

  std::map<RequestId, std::size_t> outcome_index;
  SimState state = initial_state(cfg, stream);
  while (!state.done()) {
    StepLog step = begin_step(state, false);
    for (const auto& r : state.open_requests) {
      RequestOutcome o;
      o.id = r.id;
      o.placement_step = r.placement_step;
      o.origin = r.origin;
      o.destination = r.destination;
      o.trip_km = cfg.grid.distance_km(r.origin, r.destination);
      o.decision_step = state.step;
      o.destination_vehicle_count = vehicles_in_zone(state, r.destination);
      for (const auto& v : state.vehicles) {
        const ServiceQuote q = quote(v, r, state, cfg);
        if (!q.feasible) continue;
        if (!o.best_profit || q.profit > *o.best_profit) {
          o.best_profit = q.profit;
          o.best_vehicle_zone = q.itinerary_end_zone;
          o.best_vehicle_free_steps = q.steps_until_free;
        }
      }
      outcome_index[r.id] = log.requests.size();
      log.requests.push_back(o);
    }
    GlobalAction action = policy.decide(state, cfg);
    std::sort(action.assignments.begin(), action.assignments.end(),
              [](const Assignment& a, const Assignment& b) { return a.request < b.request; });
    StepResult result = apply_dispatch(state, action, stream, cfg);
    step.assignments = action.assignments;
    absorb(step, result);
    log.total_profit += result.global_profit;
    for (const auto& p : result.agent_profits) {
      auto& o = log.requests[outcome_index.at(p.request)];
      o.vehicle = p.vehicle;
      o.profit = p.profit;
      o.status = RequestStatus::assigned;
    }
    for (RequestId id : result.rejected) log.requests[outcome_index.at(id)].status = RequestStatus::rejected;
    for (const auto& e : result.pickups) {
      auto& o = log.requests[outcome_index.at(e.request)];
      o.pickup_step = e.step;
      o.status = RequestStatus::in_vehicle;
    }
    for (const auto& e : result.dropoffs) {
      auto& o = log.requests[outcome_index.at(e.request)];
      o.dropoff_step = e.step;
      o.status = RequestStatus::completed;
    }
    log.steps.push_back(std::move(step));
    state = std::move(result.next);
  }

  auto busy = [](const SimState& s) {
    return std::any_of(s.vehicles.begin(), s.vehicles.end(), [](const Vehicle& v) { return !v.idle(); });
  };
  while (busy(state)) {
    StepLog step = begin_step(state, true);
    StepResult result = advance_idle(state, cfg);
    absorb(step, result);
    for (const auto& e : result.pickups) {
      auto& o = log.requests[outcome_index.at(e.request)];
      o.pickup_step = e.step;
      o.status = RequestStatus::in_vehicle;
    }
    for (const auto& e : result.dropoffs) {
      auto& o = log.requests[outcome_index.at(e.request)];
      o.dropoff_step = e.step;
      o.status = RequestStatus::completed;
    }
    log.steps.push_back(std::move(step));
    state = std::move(result.next);
  }
  // Closing snapshot so consecutive snapshots cover every movement.
  log.steps.push_back(begin_step(state, true));
  return log;
}

EpisodeConfig episode_config_from(const EpisodeLogHeader& header) {
  EpisodeConfig cfg;
  cfg.grid = ZoneGrid(header.zones, header.neighbor_distance_m, header.steps_between_neighbors);
  cfg.n_vehicles = header.n_vehicles;
  cfg.revenue_per_km = header.revenue_per_km;
  cfg.cost_per_km = header.cost_per_km;
  cfg.max_wait_steps = header.max_wait_steps;
  cfg.episode_length = header.episode_length;
  return cfg;
}

void write_episode_log(std::ostream& out, const EpisodeLog& log) {
  const auto& h = log.header;
  json zones = json::array();
  for (const auto& c : h.zones) zones.push_back(json::array({c.q, c.r}));
  json header = {{"type", "header"},
                 {"schema", "amod.episode_log"},
                 {"version", h.schema_version},
                 {"policy", h.policy},
                 {"date", h.date_label},
                 {"stream_seed", h.stream_seed},
                 {"zones", zones},
                 {"neighbor_distance_m", h.neighbor_distance_m},
                 {"steps_between_neighbors", h.steps_between_neighbors},
                 {"n_vehicles", h.n_vehicles},
                 {"revenue_per_km", h.revenue_per_km},
                 {"cost_per_km", h.cost_per_km},
                 {"max_wait_steps", h.max_wait_steps},
                 {"episode_length", h.episode_length}};
  out << header.dump() << '\n';

  for (const auto& s : log.steps) {
    json vehicles = json::array();
    for (const auto& v : s.vehicles)
      vehicles.push_back(json::array({v.id, v.zone, v.next_zone, v.steps_to_next, v.jobs}));
    json assignments = json::array();
    for (const auto& a : s.assignments) assignments.push_back(json::array({a.vehicle, a.request}));
    json profits = json::array();
    for (const auto& p : s.agent_profits) profits.push_back(json::array({p.vehicle, p.request, p.profit}));
    json pickups = json::array();
    for (const auto& e : s.pickups) pickups.push_back(to_json(e));
    json dropoffs = json::array();
    for (const auto& e : s.dropoffs) dropoffs.push_back(to_json(e));
    json rec = {{"type", "step"},        {"step", s.step},
                {"drain", s.drain},      {"digest", s.state_digest},
                {"vehicles", vehicles},  {"open", s.open_requests},
                {"assign", assignments}, {"profits", profits},
                {"global_profit", s.global_profit}, {"rejected", s.rejected},
                {"pickups", pickups},    {"dropoffs", dropoffs}};
    out << rec.dump() << '\n';
  }
  for (const auto& r : log.requests) {
    json rec = {{"type", "request"},
                {"id", r.id},
                {"placed", r.placement_step},
                {"origin", r.origin},
                {"destination", r.destination},
                {"trip_km", r.trip_km},
                {"decision_step", r.decision_step},
                {"vehicle", optional_json(r.vehicle)},
                {"profit", r.profit},
                {"best_profit", optional_json(r.best_profit)},
                {"best_vehicle_zone", optional_json(r.best_vehicle_zone)},
                {"best_vehicle_free_steps", r.best_vehicle_free_steps},
                {"destination_vehicles", r.destination_vehicle_count},
                {"pickup_step", optional_json(r.pickup_step)},
                {"dropoff_step", optional_json(r.dropoff_step)},
                {"status", to_string(r.status)}};
    out << rec.dump() << '\n';
  }
  json summary = {{"type", "summary"},
                  {"total_profit", log.total_profit},
                  {"requests", log.requests.size()},
                  {"accepted", log.accepted_count()}};
  out << summary.dump() << '\n';
}

EpisodeLog read_episode_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    const std::string type = rec.at("type").get<std::string>();
    if (type == "header") {
      if (rec.at("schema") != "amod.episode_log") throw std::runtime_error("not an episode log");
      auto& h = log.header;
      h.schema_version = rec.at("version").get<int>();
      if (h.schema_version != kEpisodeLogSchemaVersion)
        throw std::runtime_error("unsupported episode log version " + std::to_string(h.schema_version));
      h.policy = rec.at("policy").get<std::string>();
      h.date_label = rec.at("date").get<std::string>();
      h.stream_seed = rec.at("stream_seed").get<std::uint64_t>();
      for (const auto& z : rec.at("zones")) h.zones.push_back({z.at(0).get<int>(), z.at(1).get<int>()});
      h.neighbor_distance_m = rec.at("neighbor_distance_m").get<double>();
      h.steps_between_neighbors = rec.at("steps_between_neighbors").get<int>();
      h.n_vehicles = rec.at("n_vehicles").get<int>();
      h.revenue_per_km = rec.at("revenue_per_km").get<double>();
      h.cost_per_km = rec.at("cost_per_km").get<double>();
      h.max_wait_steps = rec.at("max_wait_steps").get<int>();
      h.episode_length = rec.at("episode_length").get<int>();
      have_header = true;
    } else if (type == "step") {
      StepLog s;
      s.step = rec.at("step").get<int>();
      s.drain = rec.at("drain").get<bool>();
      s.state_digest = rec.at("digest").get<std::string>();
      for (const auto& v : rec.at("vehicles"))
        s.vehicles.push_back({v.at(0).get<int>(), v.at(1).get<int>(), v.at(2).get<int>(),
                              v.at(3).get<int>(), v.at(4).get<int>()});
      s.open_requests = rec.at("open").get<std::vector<RequestId>>();
      for (const auto& a : rec.at("assign")) s.assignments.push_back({a.at(0).get<int>(), a.at(1).get<int>()});
      for (const auto& p : rec.at("profits"))
        s.agent_profits.push_back({p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<double>()});
      s.global_profit = rec.at("global_profit").get<double>();
      s.rejected = rec.at("rejected").get<std::vector<RequestId>>();
      for (const auto& e : rec.at("pickups")) s.pickups.push_back(event_from(e));
      for (const auto& e : rec.at("dropoffs")) s.dropoffs.push_back(event_from(e));
      log.steps.push_back(std::move(s));
    } else if (type == "request") {
      RequestOutcome r;
      r.id = rec.at("id").get<int>();
      r.placement_step = rec.at("placed").get<int>();
      r.origin = rec.at("origin").get<int>();
      r.destination = rec.at("destination").get<int>();
      r.trip_km = rec.at("trip_km").get<double>();
      r.decision_step = rec.at("decision_step").get<int>();
      r.vehicle = optional_from<int>(rec.at("vehicle"));
      r.profit = rec.at("profit").get<double>();
      r.best_profit = optional_from<double>(rec.at("best_profit"));
      r.best_vehicle_zone = optional_from<int>(rec.at("best_vehicle_zone"));
      r.best_vehicle_free_steps = rec.at("best_vehicle_free_steps").get<int>();
      r.destination_vehicle_count = rec.at("destination_vehicles").get<int>();
      r.pickup_step = optional_from<int>(rec.at("pickup_step"));
      r.dropoff_step = optional_from<int>(rec.at("dropoff_step"));
      r.status = parse_status(rec.at("status").get<std::string>());
      log.requests.push_back(r);
    } else if (type == "summary") {
      log.total_profit = rec.at("total_profit").get<double>();
    } else {
      throw std::runtime_error("episode log: unknown record type '" + type + "'");
    }
  }
  if (!have_header) throw std::runtime_error("episode log: missing header record");
  return log;
}

void save_episode_log(const std::filesystem::path& path, const EpisodeLog& log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_episode_log(out, log);
}

EpisodeLog load_episode_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_episode_log(in);
}

}  // namespace amod
