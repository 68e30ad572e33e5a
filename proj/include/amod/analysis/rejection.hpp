#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "amod/episode_log.hpp"

namespace amod {

/// Rejections among a set of requests. The rate is undefined (nullopt) for
/// an empty set rather than 0.
struct RateEstimate {
  std::size_t rejected = 0;
  std::size_t total = 0;

  std::optional<double> rate() const;
  void add(bool was_rejected) {
    ++total;
    rejected += was_rejected ? 1 : 0;
  }
};

/// Rejection rates of profitable requests (best feasible profit > 0 at
/// decision time), overall and split by how many vehicles stood in the
/// destination zone when the request was decided.
struct RejectionBreakdown {
  RateEstimate overall;
  /// Destination zone held no vehicle.
  RateEstimate empty_destination;
  /// Destination zone held more than two vehicles.
  RateEstimate crowded_destination;

  /// crowded minus empty; undefined if either side is.
  std::optional<double> gap() const;
};

inline constexpr int kCrowdedAbove = 2;

bool is_profitable(const RequestOutcome& r);

RejectionBreakdown rejection_breakdown(const EpisodeLog& log);
/// Pooled over all requests of all logs.
RejectionBreakdown rejection_breakdown(const std::vector<EpisodeLog>& logs);

/// Mean of the defined rates over groups (e.g. seeds); nullopt if none is.
std::optional<double> mean_defined(const std::vector<std::optional<double>>& rates);

}  // namespace amod
