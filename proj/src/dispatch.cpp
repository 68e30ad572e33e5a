#include "amod/dispatch.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "amod/matching.hpp"

namespace amod {

AgentSet build_agents(const SimState& state, const EpisodeConfig& cfg) {
  std::vector<std::size_t> request_order(state.open_requests.size());
  for (std::size_t i = 0; i < request_order.size(); ++i) request_order[i] = i;
  std::sort(request_order.begin(), request_order.end(), [&](std::size_t a, std::size_t b) {
    return state.open_requests[a].id < state.open_requests[b].id;
  });
  std::vector<std::size_t> vehicle_order(state.vehicles.size());
  for (std::size_t i = 0; i < vehicle_order.size(); ++i) vehicle_order[i] = i;
  std::sort(vehicle_order.begin(), vehicle_order.end(), [&](std::size_t a, std::size_t b) {
    return state.vehicles[a].id < state.vehicles[b].id;
  });

  AgentSet set;
  for (std::size_t ri : request_order) {
    const Request& r = state.open_requests[ri];
    for (std::size_t vi : vehicle_order) {
      const Vehicle& v = state.vehicles[vi];
      ServiceQuote q = quote(v, r, state, cfg);
      if (!q.feasible) continue;
      set.agents.push_back({v.id, r.id, vi, ri, q});
    }
  }
  return set;
}

std::vector<AgentDecision> score_agents(std::span<const ActionProbs> probs, ScoreMode mode,
                                        std::mt19937_64& rng) {
  std::vector<AgentDecision> out;
  out.reserve(probs.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& p : probs) {
    AgentDecision d;
    const bool accept = mode == ScoreMode::test ? p[0] >= p[1] : unit(rng) < p[0];
    d.action = accept ? AgentAction::accept : AgentAction::reject;
    d.score = accept ? p[0] : 0.0;
    out.push_back(d);
  }
  return out;
}

GlobalAction solve_matching(const AgentSet& agents, std::span<const double> scores) {
  if (scores.size() != agents.size())
    throw std::invalid_argument("solve_matching: one score per agent required");
  std::map<RequestId, int> request_rank;
  std::map<VehicleId, int> vehicle_rank;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (scores[i] < 0.0) throw std::invalid_argument("solve_matching: negative score");
    request_rank.emplace(agents.agents[i].request, 0);
    vehicle_rank.emplace(agents.agents[i].vehicle, 0);
  }
  int k = 0;
  for (auto& [id, rank] : request_rank) rank = k++;
  std::vector<RequestId> request_of(request_rank.size());
  for (const auto& [id, rank] : request_rank) request_of[static_cast<std::size_t>(rank)] = id;
  k = 0;
  for (auto& [id, rank] : vehicle_rank) rank = k++;
  std::vector<VehicleId> vehicle_of(vehicle_rank.size());
  for (const auto& [id, rank] : vehicle_rank) vehicle_of[static_cast<std::size_t>(rank)] = id;

  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (scores[i] <= 0.0) continue;
    edges.push_back({request_rank.at(agents.agents[i].request),
                     vehicle_rank.at(agents.agents[i].vehicle), scores[i]});
  }
  GlobalAction action;
  for (const auto& [l, r] : max_weight_matching(static_cast<int>(request_of.size()),
                                                static_cast<int>(vehicle_of.size()), edges))
    action.assignments.push_back({vehicle_of[static_cast<std::size_t>(r)],
                                  request_of[static_cast<std::size_t>(l)]});
  return action;
}

GlobalAction greedy_dispatch(const SimState& state, const EpisodeConfig& cfg) {
  std::vector<const Request*> requests;
  for (const auto& r : state.open_requests) requests.push_back(&r);
  std::sort(requests.begin(), requests.end(),
            [](const Request* a, const Request* b) { return a->id < b->id; });
  std::set<VehicleId> taken;
  GlobalAction action;
  for (const Request* r : requests) {
    const Vehicle* best = nullptr;
    Money best_profit = 0.0;
    for (const auto& v : state.vehicles) {
      if (taken.count(v.id)) continue;
      const ServiceQuote q = quote(v, *r, state, cfg);
      if (!q.feasible || q.profit <= 0.0) continue;
      if (best == nullptr || q.profit > best_profit || (q.profit == best_profit && v.id < best->id)) {
        best = &v;
        best_profit = q.profit;
      }
    }
    if (best != nullptr) {
      taken.insert(best->id);
      action.assignments.push_back({best->id, r->id});
    }
  }
  return action;
}

std::vector<bool> matched_flags(const AgentSet& agents, const GlobalAction& action) {
  std::set<Assignment> chosen(action.assignments.begin(), action.assignments.end());
  std::vector<bool> out(agents.size(), false);
  for (std::size_t i = 0; i < agents.size(); ++i)
    out[i] = chosen.count({agents.agents[i].vehicle, agents.agents[i].request}) > 0;
  return out;
}

GlobalAction RandomPolicy::decide(const SimState& state, const EpisodeConfig& cfg) {
  const AgentSet agents = build_agents(state, cfg);
  std::vector<ActionProbs> probs(agents.size(), ActionProbs{accept_probability_, 1.0 - accept_probability_});
  const auto decisions = score_agents(probs, ScoreMode::train, rng_);
  std::vector<double> scores;
  for (const auto& d : decisions) scores.push_back(d.score);
  return solve_matching(agents, scores);
}

}  // namespace amod
