#include "amod/analysis/overperformance.hpp"

#include <algorithm>
#include <stdexcept>

#include "amod/analysis/rejection.hpp"

namespace amod {

std::vector<OverperformanceRecord> collect_overperformance_records(const std::vector<EpisodeLog>& logs,
                                                                   int horizon) {
  if (horizon < 1) throw std::invalid_argument("overperformance horizon must be positive");
  std::vector<OverperformanceRecord> out;
  for (const EpisodeLog& log : logs) {
    const EpisodeConfig cfg = episode_config_from(log.header);
    for (const RequestOutcome& r : log.requests) {
      if (!is_profitable(r) || !r.best_vehicle_zone) continue;
      OverperformanceRecord rec;
      rec.original_profit = *r.best_profit;
      rec.accepted = r.status != RequestStatus::rejected;
      for (const RequestOutcome& s : log.requests) {
        if (s.origin != r.origin) continue;
        if (s.placement_step <= r.placement_step || s.placement_step > r.placement_step + horizon) continue;
        rec.subsequent_profits.push_back(
            trip_profit(cfg.grid.distance_km(*r.best_vehicle_zone, s.origin), s.trip_km, cfg));
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

OverperformanceResult overperformance_ratio(const std::vector<OverperformanceRecord>& records) {
  OverperformanceResult res;
  for (const OverperformanceRecord& rec : records) {
    double pool = 0.0;
    for (Money p : rec.subsequent_profits) pool += std::max(0.0, p - rec.original_profit);
    if (rec.accepted) {
      res.acceptance_pool += pool;
      ++res.accepted_records;
    } else {
      res.rejection_pool += pool;
      ++res.rejected_records;
    }
  }
  if (res.acceptance_pool > 0.0) {
    res.ratio = res.rejection_pool / res.acceptance_pool;
  } else {
    res.diagnostic = res.rejection_pool > 0.0 ? "acceptance pool is zero" : "both pools are zero";
  }
  return res;
}

OverperformanceResult overperformance_ratio(const std::vector<EpisodeLog>& logs, int horizon) {
  return overperformance_ratio(collect_overperformance_records(logs, horizon));
}

}  // namespace amod
