#include "amod/analysis/rejection.hpp"

namespace amod {

std::optional<double> RateEstimate::rate() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(rejected) / static_cast<double>(total);
}

std::optional<double> RejectionBreakdown::gap() const {
  const auto crowded = crowded_destination.rate();
  const auto empty = empty_destination.rate();
  if (!crowded || !empty) return std::nullopt;
  return *crowded - *empty;
}

bool is_profitable(const RequestOutcome& r) { return r.best_profit.has_value() && *r.best_profit > 0.0; }

namespace {

void accumulate(RejectionBreakdown& b, const EpisodeLog& log) {
  for (const RequestOutcome& r : log.requests) {
    if (!is_profitable(r)) continue;
    const bool rejected = r.status == RequestStatus::rejected;
    b.overall.add(rejected);
    if (r.destination_vehicle_count == 0) b.empty_destination.add(rejected);
    if (r.destination_vehicle_count > kCrowdedAbove) b.crowded_destination.add(rejected);
  }
}

}  // namespace

RejectionBreakdown rejection_breakdown(const EpisodeLog& log) {
  RejectionBreakdown b;
  accumulate(b, log);
  return b;
}

RejectionBreakdown rejection_breakdown(const std::vector<EpisodeLog>& logs) {
  RejectionBreakdown b;
  for (const EpisodeLog& log : logs) accumulate(b, log);
  return b;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& rates) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rates) {
    if (!r) continue;
    sum += *r;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace amod
