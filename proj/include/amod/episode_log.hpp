#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amod/simulator.hpp"

namespace amod {

/// Anything that turns a state into a global dispatch action.
class DispatchPolicy {
 public:
  virtual ~DispatchPolicy() = default;
  virtual std::string name() const = 0;
  virtual GlobalAction decide(const SimState& state, const EpisodeConfig& cfg) = 0;
};

struct VehicleSnapshot {
  VehicleId id = 0;
  ZoneId zone = 0;
  ZoneId next_zone = 0;
  int steps_to_next = 0;
  int jobs = 0;

  friend bool operator==(const VehicleSnapshot&, const VehicleSnapshot&) = default;
};

/// One simulated step. `drain` steps run after the last decision step and
/// only finish outstanding itineraries.
struct StepLog {
  int step = 0;
  bool drain = false;
  std::string state_digest;
  std::vector<VehicleSnapshot> vehicles;
  std::vector<RequestId> open_requests;
  std::vector<Assignment> assignments;
  std::vector<AgentProfit> agent_profits;
  Money global_profit = 0.0;
  std::vector<RequestId> rejected;
  std::vector<ServiceEvent> pickups;
  std::vector<ServiceEvent> dropoffs;
};

/// Decision context and fate of one request.
struct RequestOutcome {
  RequestId id = 0;
  int placement_step = 0;
  ZoneId origin = 0;
  ZoneId destination = 0;
  double trip_km = 0.0;
  int decision_step = 0;
  std::optional<VehicleId> vehicle;
  Money profit = 0.0;
  /// Highest profit over vehicles able to serve it at decision time.
  std::optional<Money> best_profit;
  /// Itinerary-end zone and free-in steps of the vehicle offering best_profit.
  std::optional<ZoneId> best_vehicle_zone;
  int best_vehicle_free_steps = 0;
  int destination_vehicle_count = 0;
  std::optional<int> pickup_step;
  std::optional<int> dropoff_step;
  RequestStatus status = RequestStatus::pending;
};

struct EpisodeLogHeader {
  int schema_version = 1;
  std::string policy;
  std::string date_label;
  std::uint64_t stream_seed = 0;
  std::vector<HexCoord> zones;
  double neighbor_distance_m = 0.0;
  int steps_between_neighbors = 0;
  int n_vehicles = 0;
  double revenue_per_km = 0.0;
  double cost_per_km = 0.0;
  int max_wait_steps = 0;
  int episode_length = 0;
};

struct EpisodeLog {
  EpisodeLogHeader header;
  std::vector<StepLog> steps;
  std::vector<RequestOutcome> requests;
  Money total_profit = 0.0;

  std::size_t accepted_count() const;
};

inline constexpr int kEpisodeLogSchemaVersion = 1;

/// 64-bit FNV-1a digest of the state's vehicles and open requests, hex encoded.
std::string state_digest(const SimState& state);

/// Plays one episode: every decision step, then drain steps until all
/// vehicles are idle. Deterministic given the policy's own state.
EpisodeLog rollout(DispatchPolicy& policy, const EpisodeConfig& cfg, const RequestStream& stream);

/// Rebuilds grid and prices recorded in a log header.
EpisodeConfig episode_config_from(const EpisodeLogHeader& header);

/// Line-delimited JSON: a header record, one record per step, one per request
/// and a closing summary record.
void write_episode_log(std::ostream& out, const EpisodeLog& log);
EpisodeLog read_episode_log(std::istream& in);
void save_episode_log(const std::filesystem::path& path, const EpisodeLog& log);
EpisodeLog load_episode_log(const std::filesystem::path& path);

}  // namespace amod
