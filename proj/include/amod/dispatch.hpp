#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "amod/episode_log.hpp"
#include "amod/simulator.hpp"

namespace amod {

/// Per-agent action index: 0 accepts the pairing, 1 rejects it.
enum class AgentAction : int { accept = 0, reject = 1 };
inline constexpr int kActionsPerAgent = 2;

using ActionProbs = std::array<double, kActionsPerAgent>;

/// A (vehicle, request) pairing the simulator would allow this step.
struct Agent {
  VehicleId vehicle = 0;
  RequestId request = 0;
  std::size_t vehicle_index = 0;
  std::size_t request_index = 0;
  ServiceQuote quote;
};

/// All feasible pairings of a state, ordered by (request id, vehicle id).
struct AgentSet {
  std::vector<Agent> agents;

  std::size_t size() const { return agents.size(); }
  bool empty() const { return agents.empty(); }
};

AgentSet build_agents(const SimState& state, const EpisodeConfig& cfg);

enum class ScoreMode { train, test };

struct AgentDecision {
  AgentAction action = AgentAction::reject;
  double score = 0.0;
};

/// Train mode samples from each probability pair, test mode takes the argmax
/// (accept on an exact tie). The score is p_accept for an accept, else 0.
std::vector<AgentDecision> score_agents(std::span<const ActionProbs> probs, ScoreMode mode,
                                        std::mt19937_64& rng);

/// Maximum-total-score assignment with at most one request per vehicle and
/// one vehicle per request. Zero scores never enter the matching. Among
/// optimal assignments, lower (request id, vehicle id) pairs are preferred.
GlobalAction solve_matching(const AgentSet& agents, std::span<const double> scores);

/// Requests in submission order, each given to the free feasible vehicle
/// with the highest positive profit (lowest id on ties), else rejected.
GlobalAction greedy_dispatch(const SimState& state, const EpisodeConfig& cfg);

/// Whether each agent's pairing appears in the action.
std::vector<bool> matched_flags(const AgentSet& agents, const GlobalAction& action);

class GreedyPolicy final : public DispatchPolicy {
 public:
  std::string name() const override { return "greedy"; }
  GlobalAction decide(const SimState& state, const EpisodeConfig& cfg) override {
    return greedy_dispatch(state, cfg);
  }
};

/// Every agent accepts with a fixed probability; scores go through the
/// matching like a learned actor's would.
class RandomPolicy final : public DispatchPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed, double accept_probability = 0.5)
      : rng_(seed), accept_probability_(accept_probability) {}
  std::string name() const override { return "random"; }
  GlobalAction decide(const SimState& state, const EpisodeConfig& cfg) override;

 private:
  std::mt19937_64 rng_;
  double accept_probability_;
};

}  // namespace amod
