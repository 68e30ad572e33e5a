#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amod/grid.hpp"
#include "amod/request_stream.hpp"

namespace amod {

using RequestId = int;
using VehicleId = int;
using Money = double;

enum class RequestStatus { pending, assigned, in_vehicle, completed, rejected };

std::string to_string(RequestStatus status);

struct Request {
  RequestId id = 0;
  ZoneId origin = 0;
  ZoneId destination = 0;
  int placement_step = 0;
  int max_wait_steps = 5;
  RequestStatus status = RequestStatus::pending;

  friend bool operator==(const Request&, const Request&) = default;
};

struct Job {
  RequestId request = 0;
  ZoneId pickup = 0;
  ZoneId dropoff = 0;
  bool picked_up = false;

  friend bool operator==(const Job&, const Job&) = default;
};

inline constexpr std::size_t kMaxItinerary = 2;

/// A vehicle sits in `zone` or travels toward the adjacent `next_zone`,
/// arriving after `steps_to_next` more steps.
struct Vehicle {
  VehicleId id = 0;
  ZoneId zone = 0;
  ZoneId next_zone = 0;
  int steps_to_next = 0;
  std::vector<Job> itinerary;

  bool idle() const { return itinerary.empty(); }
  bool moving() const { return steps_to_next > 0; }

  friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

/// Observable system snapshot at the start of a decision step.
struct SimState {
  int step = 1;
  int episode_length = 60;
  std::vector<Vehicle> vehicles;
  /// Requests placed during step - 1, awaiting a decision.
  std::vector<Request> open_requests;

  bool done() const { return step > episode_length; }
  const Request* find_request(RequestId id) const;

  friend bool operator==(const SimState&, const SimState&) = default;
};

enum class PlacementRule { uniform_random, fixed };

struct EpisodeConfig {
  ZoneGrid grid;
  int n_vehicles = 4;
  double revenue_per_km = 5.00;
  double cost_per_km = 4.50;
  int max_wait_steps = 5;
  int episode_length = 60;
  PlacementRule placement = PlacementRule::uniform_random;
  std::uint64_t placement_seed = 0;
  std::vector<ZoneId> fixed_positions;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct Assignment {
  VehicleId vehicle = 0;
  RequestId request = 0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

/// Assignments chosen for one step; open requests without an assignment are
/// rejected.
struct GlobalAction {
  std::vector<Assignment> assignments;
};

/// What it takes for a vehicle to serve a request once its itinerary is done.
struct ServiceQuote {
  bool feasible = false;
  ZoneId itinerary_end_zone = 0;
  int steps_until_free = 0;
  int approach_steps = 0;
  double approach_km = 0.0;
  double trip_km = 0.0;
  /// Steps of wait budget left at pickup (negative when infeasible).
  int wait_slack = 0;
  Money profit = 0.0;
};

/// Zone where the itinerary ends and the steps needed to get there.
std::pair<ZoneId, int> itinerary_end(const Vehicle& vehicle, const ZoneGrid& grid);

ServiceQuote quote(const Vehicle& vehicle, const Request& request, const SimState& state,
                   const EpisodeConfig& cfg);

bool feasible(const Vehicle& vehicle, const Request& request, const SimState& state,
              const ZoneGrid& grid);

/// revenue * trip_km - cost * (approach_km + trip_km); may be negative.
Money profit(const Vehicle& vehicle, const Request& request, const ZoneGrid& grid,
             const EpisodeConfig& cfg);

Money trip_profit(double approach_km, double trip_km, const EpisodeConfig& cfg);

struct AgentProfit {
  VehicleId vehicle = 0;
  RequestId request = 0;
  Money profit = 0.0;
};

struct ServiceEvent {
  RequestId request = 0;
  VehicleId vehicle = 0;
  int step = 0;
};

struct StepResult {
  SimState next;
  std::vector<AgentProfit> agent_profits;
  Money global_profit = 0.0;
  std::vector<RequestId> rejected;
  std::vector<ServiceEvent> pickups;
  std::vector<ServiceEvent> dropoffs;
};

/// Builds the step-1 state: vehicles placed per the config rule and the
/// requests the stream places at step 0.
SimState initial_state(const EpisodeConfig& cfg, const RequestStream& stream);

/// Returns an empty string when the action is valid for `state`, otherwise a
/// diagnostic.
std::string check_action(const SimState& state, const GlobalAction& action,
                         const EpisodeConfig& cfg);

/// Applies the action, credits per-agent profits at assignment time, rejects
/// the remaining open requests, advances every vehicle by one step and loads
/// the next batch from `stream`. Throws std::invalid_argument for an invalid
/// action.
StepResult apply_dispatch(const SimState& state, const GlobalAction& action,
                          const RequestStream& stream, const EpisodeConfig& cfg);

/// Moves vehicles one step with no decisions and no new requests. Used after
/// the last decision step to finish outstanding itineraries.
StepResult advance_idle(const SimState& state, const EpisodeConfig& cfg);

/// Count of vehicles whose current zone is `zone`.
int vehicles_in_zone(const SimState& state, ZoneId zone);

}  // namespace amod
