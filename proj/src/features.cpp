#include "amod/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace amod {

FeatureDims feature_dims(std::size_t n_zones) {
  const int z = static_cast<int>(n_zones);
  return {own_feature::kScalarCount + 3 * z, 2 * z + 1, 2 * z + 2};
}

StateFeatures encode_state(const SimState& state, const AgentSet& agents, const EpisodeConfig& cfg) {
  const ZoneGrid& grid = cfg.grid;
  const auto z = static_cast<Eigen::Index>(grid.size());
  const FeatureDims dims = feature_dims(grid.size());
  const double wait = std::max(1, cfg.max_wait_steps);
  const double fleet = std::max(1, cfg.n_vehicles);

  StateFeatures f;
  f.requests = nn::Matrix::Zero(static_cast<Eigen::Index>(state.open_requests.size()), dims.request);
  for (std::size_t i = 0; i < state.open_requests.size(); ++i) {
    const Request& r = state.open_requests[i];
    const auto row = static_cast<Eigen::Index>(i);
    f.requests(row, r.origin) = 1.0;
    f.requests(row, z + r.destination) = 1.0;
    f.requests(row, 2 * z) = grid.distance_km(r.origin, r.destination);
  }

  f.vehicles = nn::Matrix::Zero(static_cast<Eigen::Index>(state.vehicles.size()), dims.vehicle);
  std::vector<int> zone_count(grid.size(), 0);
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    const Vehicle& v = state.vehicles[i];
    const auto [end_zone, free_in] = itinerary_end(v, grid);
    const auto row = static_cast<Eigen::Index>(i);
    f.vehicles(row, v.zone) = 1.0;
    f.vehicles(row, z + end_zone) = 1.0;
    f.vehicles(row, 2 * z) = free_in / (2.0 * wait);
    f.vehicles(row, 2 * z + 1) = static_cast<double>(v.itinerary.size()) / kMaxItinerary;
    ++zone_count[static_cast<std::size_t>(v.zone)];
  }

  const double open = static_cast<double>(state.open_requests.size());
  f.own = nn::Matrix::Zero(static_cast<Eigen::Index>(agents.size()), dims.own);
  for (std::size_t a = 0; a < agents.size(); ++a) {
    const Agent& agent = agents.agents[a];
    const Request& r = state.open_requests[agent.request_index];
    const Vehicle& v = state.vehicles[agent.vehicle_index];
    const ServiceQuote& q = agent.quote;
    const auto row = static_cast<Eigen::Index>(a);
    using namespace own_feature;
    f.own(row, approach_steps) = q.approach_steps / wait;
    f.own(row, approach_km) = q.approach_km;
    f.own(row, trip_km) = q.trip_km;
    f.own(row, own_feature::profit) = q.profit;
    f.own(row, wait_slack) = q.wait_slack / wait;
    f.own(row, itinerary_load) = static_cast<double>(v.itinerary.size()) / kMaxItinerary;
    f.own(row, free_in) = q.steps_until_free / (2.0 * wait);
    f.own(row, progress) = static_cast<double>(state.step) / state.episode_length;
    f.own(row, destination_vehicles) = zone_count[static_cast<std::size_t>(r.destination)] / fleet;
    f.own(row, origin_vehicles) = zone_count[static_cast<std::size_t>(r.origin)] / fleet;
    f.own(row, open_requests) = open / fleet;
    f.own(row, kScalarCount + r.origin) = 1.0;
    f.own(row, kScalarCount + z + r.destination) = 1.0;
    f.own(row, kScalarCount + 2 * z + q.itinerary_end_zone) = 1.0;
    f.agent_request_row.push_back(static_cast<int>(agent.request_index));
    f.agent_vehicle.push_back(static_cast<int>(v.id));
  }
  return f;
}

ObservationBatch make_batch(const std::vector<const StateFeatures*>& states,
                            const std::vector<const std::vector<bool>*>& post_accept,
                            const FeatureDims& dims) {
  if (!post_accept.empty() && post_accept.size() != states.size())
    throw std::invalid_argument("make_batch: post_accept must match states");
  Eigen::Index n_agents = 0, n_requests = 0, n_vehicles = 0;
  for (const auto* s : states) {
    n_agents += s->own.rows();
    n_requests += s->requests.rows();
    n_vehicles += s->vehicles.rows();
  }
  ObservationBatch b;
  b.own.resize(n_agents, dims.own);
  b.requests.resize(n_requests, dims.request);
  b.vehicles.resize(n_vehicles, dims.vehicle);
  b.post_accept = Eigen::VectorXd::Zero(n_agents);

  Eigen::Index agent_at = 0, request_at = 0, vehicle_at = 0;
  std::vector<int> row;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const StateFeatures& s = *states[k];
    const auto na = s.own.rows();
    if (na > 0) b.own.middleRows(agent_at, na) = s.own;
    if (s.requests.rows() > 0) b.requests.middleRows(request_at, s.requests.rows()) = s.requests;
    if (s.vehicles.rows() > 0) b.vehicles.middleRows(vehicle_at, s.vehicles.rows()) = s.vehicles;
    const std::vector<bool>* post = post_accept.empty() ? nullptr : post_accept[k];
    for (Eigen::Index a = 0; a < na; ++a) {
      row.clear();
      for (Eigen::Index r = 0; r < s.requests.rows(); ++r)
        if (r != s.agent_request_row[static_cast<std::size_t>(a)])
          row.push_back(static_cast<int>(request_at + r));
      b.request_groups.push_row(row);
      row.clear();
      for (Eigen::Index v = 0; v < s.vehicles.rows(); ++v) row.push_back(static_cast<int>(vehicle_at + v));
      b.vehicle_groups.push_row(row);
      row.clear();
      for (Eigen::Index o = 0; o < na; ++o)
        if (o != a) row.push_back(static_cast<int>(agent_at + o));
      b.other_agents.push_row(row);
      if (post != nullptr && !post->empty() && (*post)[static_cast<std::size_t>(a)])
        b.post_accept(agent_at + a) = 1.0;
    }
    agent_at += na;
    request_at += s.requests.rows();
    vehicle_at += s.vehicles.rows();
    b.state_offsets.push_back(static_cast<int>(agent_at));
  }
  return b;
}

}  // namespace amod
