#pragma once

// Reference implementations written independently of the library code they
// check: slow, direct, and easy to read.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <queue>
#include <vector>

#include "amod/episode_log.hpp"
#include "amod/grid.hpp"

namespace amod::testing {

/// All-pairs hop counts by BFS over axial-neighbour adjacency.
inline std::vector<std::vector<int>> bfs_hops(const std::vector<HexCoord>& coords) {
  const int n = static_cast<int>(coords.size());
  auto adjacent = [&](int a, int b) {
    const int dq = coords[a].q - coords[b].q, dr = coords[a].r - coords[b].r;
    return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) == 2;
  };
  std::vector<std::vector<int>> hops(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    hops[s][s] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v)
        if (hops[s][v] < 0 && adjacent(u, v)) {
          hops[s][v] = hops[s][u] + 1;
          q.push(v);
        }
    }
  }
  return hops;
}

/// Best total score of a one-to-one assignment; score[r][v] <= 0 means the
/// pair is unavailable. Tries every vehicle (or none) for each request.
inline double brute_force_assignment(const std::vector<std::vector<double>>& score) {
  const std::size_t nr = score.size();
  const std::size_t nv = nr ? score[0].size() : 0;
  double best = 0.0;
  std::vector<bool> used(nv, false);
  auto go = [&](auto&& self, std::size_t r, double acc) -> void {
    if (r == nr) {
      best = std::max(best, acc);
      return;
    }
    self(self, r + 1, acc);
    for (std::size_t v = 0; v < nv; ++v) {
      if (used[v] || score[r][v] <= 0.0) continue;
      used[v] = true;
      self(self, r + 1, acc + score[r][v]);
      used[v] = false;
    }
  };
  go(go, 0, 0.0);
  return best;
}

/// Two-sided exact signed-rank p-value: fraction of the 2^n sign flips of the
/// observed differences whose |W+ - W-| is at least the observed one.
inline double enumerate_signed_rank_p(const std::vector<double>& differences) {
  std::vector<double> d;
  for (double x : differences)
    if (x != 0.0) d.push_back(x);
  const std::size_t n = d.size();
  // Average ranks of |d|, computed by counting.
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++below;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = below + (equal + 1) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) observed += d[i] > 0 ? rank[i] : -rank[i];
  std::uint64_t extreme = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += (mask >> i & 1ull) ? rank[i] : -rank[i];
    if (std::abs(t) >= std::abs(observed) - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(1ull << n);
}

/// Overperformance ratio recomputed from a log's requests and header alone.
/// Returns {rejection pool, acceptance pool}.
inline std::pair<double, double> overperformance_pools(const std::vector<EpisodeLog>& logs, int horizon) {
  double rejected_pool = 0.0, accepted_pool = 0.0;
  for (const EpisodeLog& log : logs) {
    const auto hops = bfs_hops(log.header.zones);
    const double km = log.header.neighbor_distance_m / 1000.0;
    for (const RequestOutcome& r : log.requests) {
      if (!r.best_profit || *r.best_profit <= 0.0 || !r.best_vehicle_zone) continue;
      double pool = 0.0;
      for (const RequestOutcome& s : log.requests) {
        if (s.origin != r.origin || s.placement_step <= r.placement_step ||
            s.placement_step > r.placement_step + horizon)
          continue;
        const double approach = hops[*r.best_vehicle_zone][s.origin] * km;
        const double trip = hops[s.origin][s.destination] * km;
        const double theoretical = log.header.revenue_per_km * trip - log.header.cost_per_km * (approach + trip);
        pool += std::max(0.0, theoretical - *r.best_profit);
      }
      (r.status == RequestStatus::rejected ? rejected_pool : accepted_pool) += pool;
    }
  }
  return {rejected_pool, accepted_pool};
}

}  // namespace amod::testing
