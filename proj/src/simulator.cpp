#include "amod/simulator.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace amod {
namespace {

// Performs every pickup/dropoff available at the vehicle's current zone.
void settle(Vehicle& v, int clock, StepResult& out) {
  while (!v.itinerary.empty() && !v.moving()) {
    Job& job = v.itinerary.front();
    if (!job.picked_up && v.zone == job.pickup) {
      job.picked_up = true;
      out.pickups.push_back({job.request, v.id, clock});
      continue;
    }
    if (job.picked_up && v.zone == job.dropoff) {
      out.dropoffs.push_back({job.request, v.id, clock});
      v.itinerary.erase(v.itinerary.begin());
      continue;
    }
    break;
  }
}

void move_one_step(Vehicle& v, const ZoneGrid& grid, int clock, StepResult& out) {
  if (v.itinerary.empty()) {
    v.next_zone = v.zone;
    return;
  }
  if (!v.moving()) {
    const Job& job = v.itinerary.front();
    const ZoneId target = job.picked_up ? job.dropoff : job.pickup;
    v.next_zone = grid.next_hop(v.zone, target);
    v.steps_to_next = grid.steps_between_neighbors();
  }
  --v.steps_to_next;
  if (v.steps_to_next == 0) {
    v.zone = v.next_zone;
    settle(v, clock + 1, out);
  }
}

std::vector<Request> requests_placed_at(const RequestStream& stream, int placement_step,
                                        const EpisodeConfig& cfg) {
  std::vector<Request> out;
  const auto [first, last] = stream.placed_at(placement_step);
  for (std::size_t i = first; i < last; ++i) {
    const auto& s = stream.requests[i];
    out.push_back(Request{static_cast<RequestId>(i), s.origin, s.destination, s.placement_step,
                          cfg.max_wait_steps, RequestStatus::pending});
  }
  return out;
}

template <typename Vehicles>
auto find_vehicle(Vehicles& vehicles, VehicleId id) -> decltype(&vehicles.front()) {
  auto it = std::find_if(vehicles.begin(), vehicles.end(),
                         [id](const Vehicle& v) { return v.id == id; });
  return it == vehicles.end() ? nullptr : &*it;
}

}  // namespace

std::string to_string(RequestStatus status) {
  switch (status) {
    case RequestStatus::pending: return "pending";
    case RequestStatus::assigned: return "assigned";
    case RequestStatus::in_vehicle: return "in_vehicle";
    case RequestStatus::completed: return "completed";
    case RequestStatus::rejected: return "rejected";
  }
  return "unknown";
}

const Request* SimState::find_request(RequestId id) const {
  for (const auto& r : open_requests)
    if (r.id == id) return &r;
  return nullptr;
}

void EpisodeConfig::validate() const {
  if (!(cost_per_km > 0.0) || !(revenue_per_km > cost_per_km))
    throw std::invalid_argument("prices must satisfy revenue_per_km > cost_per_km > 0");
  if (n_vehicles < 0) throw std::invalid_argument("n_vehicles must be non-negative");
  if (max_wait_steps < 0) throw std::invalid_argument("max_wait_steps must be non-negative");
  if (episode_length <= 0) throw std::invalid_argument("episode_length must be positive");
  if (grid.size() == 0) throw std::invalid_argument("episode config has no zone grid");
  if (placement == PlacementRule::fixed) {
    if (fixed_positions.size() != static_cast<std::size_t>(n_vehicles))
      throw std::invalid_argument("fixed placement needs one zone per vehicle");
    for (ZoneId z : fixed_positions)
      if (z < 0 || static_cast<std::size_t>(z) >= grid.size())
        throw std::invalid_argument("fixed placement zone out of range");
  }
}

std::pair<ZoneId, int> itinerary_end(const Vehicle& vehicle, const ZoneGrid& grid) {
  ZoneId pos = vehicle.moving() ? vehicle.next_zone : vehicle.zone;
  int t = vehicle.moving() ? vehicle.steps_to_next : 0;
  for (const auto& job : vehicle.itinerary) {
    if (!job.picked_up) {
      t += grid.travel_steps(pos, job.pickup);
      pos = job.pickup;
    }
    t += grid.travel_steps(pos, job.dropoff);
    pos = job.dropoff;
  }
  return {pos, t};
}

Money trip_profit(double approach_km, double trip_km, const EpisodeConfig& cfg) {
  return cfg.revenue_per_km * trip_km - cfg.cost_per_km * (approach_km + trip_km);
}

ServiceQuote quote(const Vehicle& vehicle, const Request& request, const SimState& state,
                   const EpisodeConfig& cfg) {
  const ZoneGrid& grid = cfg.grid;
  ServiceQuote q;
  const auto [end_zone, free_in] = itinerary_end(vehicle, grid);
  q.itinerary_end_zone = end_zone;
  q.steps_until_free = free_in;
  q.approach_steps = grid.travel_steps(end_zone, request.origin);
  q.approach_km = grid.distance_km(end_zone, request.origin);
  q.trip_km = grid.distance_km(request.origin, request.destination);
  q.wait_slack = request.placement_step + request.max_wait_steps -
                 (state.step + q.steps_until_free + q.approach_steps);
  q.feasible = vehicle.itinerary.size() < kMaxItinerary && q.wait_slack >= 0;
  q.profit = trip_profit(q.approach_km, q.trip_km, cfg);
  return q;
}

bool feasible(const Vehicle& vehicle, const Request& request, const SimState& state,
              const ZoneGrid& grid) {
  if (vehicle.itinerary.size() >= kMaxItinerary) return false;
  const auto [end_zone, free_in] = itinerary_end(vehicle, grid);
  const int arrival = state.step + free_in + grid.travel_steps(end_zone, request.origin);
  return arrival <= request.placement_step + request.max_wait_steps;
}

Money profit(const Vehicle& vehicle, const Request& request, const ZoneGrid& grid,
             const EpisodeConfig& cfg) {
  const ZoneId end_zone = itinerary_end(vehicle, grid).first;
  return trip_profit(grid.distance_km(end_zone, request.origin),
                     grid.distance_km(request.origin, request.destination), cfg);
}

SimState initial_state(const EpisodeConfig& cfg, const RequestStream& stream) {
  cfg.validate();
  SimState s;
  s.step = 1;
  s.episode_length = cfg.episode_length;
  std::mt19937_64 rng(cfg.placement_seed * 0x9E3779B97F4A7C15ULL ^ stream.meta.seed);
  std::uniform_int_distribution<int> zone_dist(0, static_cast<int>(cfg.grid.size()) - 1);
  for (int i = 0; i < cfg.n_vehicles; ++i) {
    Vehicle v;
    v.id = i;
    v.zone = cfg.placement == PlacementRule::fixed
                 ? cfg.fixed_positions[static_cast<std::size_t>(i)]
                 : zone_dist(rng);
    v.next_zone = v.zone;
    s.vehicles.push_back(std::move(v));
  }
  s.open_requests = requests_placed_at(stream, 0, cfg);
  return s;
}

std::string check_action(const SimState& state, const GlobalAction& action,
                         const EpisodeConfig& cfg) {
  std::set<RequestId> seen_requests;
  std::set<VehicleId> seen_vehicles;
  for (const auto& a : action.assignments) {
    std::ostringstream msg;
    const Request* r = state.find_request(a.request);
    if (r == nullptr) {
      msg << "request " << a.request << " is not open at step " << state.step;
      return msg.str();
    }
    auto vit = std::find_if(state.vehicles.begin(), state.vehicles.end(),
                            [&](const Vehicle& v) { return v.id == a.vehicle; });
    if (vit == state.vehicles.end()) {
      msg << "unknown vehicle " << a.vehicle;
      return msg.str();
    }
    if (!seen_requests.insert(a.request).second) {
      msg << "request " << a.request << " assigned more than once";
      return msg.str();
    }
    if (!seen_vehicles.insert(a.vehicle).second) {
      msg << "vehicle " << a.vehicle << " receives more than one request";
      return msg.str();
    }
    if (!feasible(*vit, *r, state, cfg.grid)) {
      msg << "vehicle " << a.vehicle << " cannot serve request " << a.request
          << " within its wait budget";
      return msg.str();
    }
  }
  return {};
}

StepResult apply_dispatch(const SimState& state, const GlobalAction& action,
                          const RequestStream& stream, const EpisodeConfig& cfg) {
  if (state.done()) throw std::invalid_argument("episode already finished");
  if (auto diag = check_action(state, action, cfg); !diag.empty())
    throw std::invalid_argument("invalid dispatch action: " + diag);

  StepResult out;
  out.next = state;
  SimState& next = out.next;

  std::set<RequestId> assigned;
  for (const auto& a : action.assignments) {
    const Request& r = *state.find_request(a.request);
    Vehicle& v = *find_vehicle(next.vehicles, a.vehicle);
    // Quoted against the pre-step state so each credit sees the itinerary as
    // it was when the decision was made.
    const Vehicle& before = *find_vehicle(state.vehicles, a.vehicle);
    const Money p = profit(before, r, cfg.grid, cfg);
    v.itinerary.push_back(Job{r.id, r.origin, r.destination, false});
    out.agent_profits.push_back({a.vehicle, a.request, p});
    out.global_profit += p;
    assigned.insert(r.id);
  }
  for (const auto& r : state.open_requests)
    if (!assigned.count(r.id)) out.rejected.push_back(r.id);

  for (auto& v : next.vehicles) settle(v, state.step, out);
  for (auto& v : next.vehicles) move_one_step(v, cfg.grid, state.step, out);

  next.step = state.step + 1;
  next.open_requests.clear();
  if (!next.done()) next.open_requests = requests_placed_at(stream, state.step, cfg);
  return out;
}

StepResult advance_idle(const SimState& state, const EpisodeConfig& cfg) {
  StepResult out;
  out.next = state;
  for (const auto& r : state.open_requests) out.rejected.push_back(r.id);
  out.next.open_requests.clear();
  for (auto& v : out.next.vehicles) settle(v, state.step, out);
  for (auto& v : out.next.vehicles) move_one_step(v, cfg.grid, state.step, out);
  out.next.step = state.step + 1;
  return out;
}

int vehicles_in_zone(const SimState& state, ZoneId zone) {
  return static_cast<int>(std::count_if(state.vehicles.begin(), state.vehicles.end(),
                                        [zone](const Vehicle& v) { return v.zone == zone; }));
}

}  // namespace amod
