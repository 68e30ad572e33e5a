#pragma once

#include <vector>

#include "amod/data.hpp"
#include "amod/grid.hpp"
#include "amod/request_stream.hpp"
#include "amod/simulator.hpp"

namespace amod::testing {

/// Small-scale 5-zone instance with vehicles at fixed zones.
inline EpisodeConfig five_zone_config(std::vector<ZoneId> positions, int episode_length = 60) {
  EpisodeConfig cfg;
  cfg.grid = build_hex_grid(5, ZoneScale::small);
  cfg.n_vehicles = static_cast<int>(positions.size());
  cfg.placement = PlacementRule::fixed;
  cfg.fixed_positions = std::move(positions);
  cfg.episode_length = episode_length;
  return cfg;
}

inline RequestStream make_stream(std::vector<StreamRequest> requests, int n_zones = 5, int episode_length = 60,
                                 const char* label = "hand") {
  RequestStream s;
  s.meta.source = StreamSource::synthetic;
  s.meta.date_label = label;
  s.meta.n_zones = n_zones;
  s.meta.episode_length = episode_length;
  s.requests = std::move(requests);
  normalize_stream(s);
  return s;
}

/// The desk-scale benchmark instance: two demand zones (1 and 3) trading
/// long trips, with a small share of trips into zones 2 and 4 that have no
/// outbound demand.
inline EpisodeConfig benchmark_instance() { return five_zone_config({1, 3, 1, 3}); }

inline SynthSpec benchmark_demand(double rate = 0.16, double leak = 0.07) {
  SynthSpec spec;
  spec.rate_per_step = {0.0, rate, 0.0, rate, 0.0};
  const double main = 1.0 - 2.0 * leak;
  spec.destination_weights = {{0, 1, 0, 1, 0},
                              {0, 0, leak, main, leak},
                              {1, 0, 0, 0, 0},
                              {0, main, leak, 0, leak},
                              {1, 0, 0, 0, 0}};
  return spec;
}

}  // namespace amod::testing
