#pragma once

#include <cstddef>
#include <vector>

#include "amod/dispatch.hpp"
#include "amod/nn/autodiff.hpp"
#include "amod/simulator.hpp"

namespace amod {

/// Column layout of the per-agent ("own pair") features. Zone one-hots for
/// origin, destination and the vehicle's itinerary end follow kOwnScalarCount.
namespace own_feature {
inline constexpr int approach_steps = 0;  // / max wait
inline constexpr int approach_km = 1;
inline constexpr int trip_km = 2;
inline constexpr int profit = 3;
inline constexpr int wait_slack = 4;  // / max wait
inline constexpr int itinerary_load = 5;  // jobs / 2
inline constexpr int free_in = 6;  // steps until free / (2 * max wait)
inline constexpr int progress = 7;  // step / episode length
inline constexpr int destination_vehicles = 8;  // / fleet size
inline constexpr int origin_vehicles = 9;  // / fleet size
inline constexpr int open_requests = 10;  // / fleet size
inline constexpr int kScalarCount = 11;
}  // namespace own_feature

struct FeatureDims {
  int own = 0;
  int request = 0;
  int vehicle = 0;

  friend bool operator==(const FeatureDims&, const FeatureDims&) = default;
};

FeatureDims feature_dims(std::size_t n_zones);

/// Raw inputs for every agent of one state: own-pair rows plus the request
/// and vehicle item sets the encoder attends over.
struct StateFeatures {
  nn::Matrix own;
  nn::Matrix requests;
  nn::Matrix vehicles;
  /// Row of `requests` holding each agent's own request (excluded from its
  /// attention set).
  std::vector<int> agent_request_row;
  /// Vehicle id of each agent.
  std::vector<int> agent_vehicle;

  std::size_t agent_count() const { return static_cast<std::size_t>(own.rows()); }
};

StateFeatures encode_state(const SimState& state, const AgentSet& agents, const EpisodeConfig& cfg);

/// Stacked features of several states. Attention segments index into the
/// stacked item matrices; `other_agents` lists, per agent, the other agents
/// of the same state (the critic's action-annotated set).
struct ObservationBatch {
  nn::Matrix own;
  nn::Matrix requests;
  nn::Matrix vehicles;
  nn::Segments request_groups;
  nn::Segments vehicle_groups;
  nn::Segments other_agents;
  /// 1 where the agent's pairing survived the matching. Critic input only.
  Eigen::VectorXd post_accept;
  /// First agent row of each state, plus the total as a sentinel.
  std::vector<int> state_offsets{0};

  std::size_t agent_count() const { return static_cast<std::size_t>(own.rows()); }
  std::size_t state_count() const { return state_offsets.size() - 1; }
};

/// `post_accept[k]` may be empty (all zeros) for state k.
ObservationBatch make_batch(const std::vector<const StateFeatures*>& states,
                            const std::vector<const std::vector<bool>*>& post_accept,
                            const FeatureDims& dims);

}  // namespace amod
