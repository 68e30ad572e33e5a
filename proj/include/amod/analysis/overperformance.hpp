#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amod/episode_log.hpp"

namespace amod {

/// One profitable request and what serving its near-future same-origin
/// successors from the same vehicle position would have earned.
struct OverperformanceRecord {
  Money original_profit = 0.0;
  bool accepted = false;
  std::vector<Money> subsequent_profits;
};

struct OverperformanceResult {
  double rejection_pool = 0.0;
  double acceptance_pool = 0.0;
  std::size_t rejected_records = 0;
  std::size_t accepted_records = 0;
  /// rejection_pool / acceptance_pool; undefined when the acceptance pool
  /// is zero (see `diagnostic`).
  std::optional<double> ratio;
  std::string diagnostic;
};

inline constexpr int kOverperformanceHorizon = 10;

/// Per profitable request: the best profit at decision time, the decision,
/// and the theoretical profits of every request from the same origin zone
/// placed within the next `horizon` steps, priced as if served from the
/// stored best-vehicle position.
std::vector<OverperformanceRecord> collect_overperformance_records(
    const std::vector<EpisodeLog>& logs, int horizon = kOverperformanceHorizon);

/// Sums max(0, subsequent - original) into a rejection pool and an
/// acceptance pool by the original decision and returns their ratio.
OverperformanceResult overperformance_ratio(const std::vector<OverperformanceRecord>& records);

OverperformanceResult overperformance_ratio(const std::vector<EpisodeLog>& logs,
                                            int horizon = kOverperformanceHorizon);

}  // namespace amod
