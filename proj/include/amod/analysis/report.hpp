#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amod/analysis/overperformance.hpp"
#include "amod/analysis/rejection.hpp"
#include "amod/episode_log.hpp"

namespace amod {

/// Descriptive statistics of one policy over its test logs, possibly from
/// several training seeds.
struct PolicyReport {
  std::string policy;
  std::size_t seeds = 0;
  /// Pooled over every log of every seed.
  RejectionBreakdown pooled;
  /// Mean over seeds of each seed's own rate (undefined rates skipped).
  std::optional<double> seed_mean_overall;
  std::optional<double> seed_mean_empty;
  std::optional<double> seed_mean_crowded;
  std::optional<double> seed_mean_gap;
  OverperformanceResult overperformance;
  /// Date labels in first-seen order and the seed-averaged sum of episode
  /// profits per date.
  std::vector<std::string> dates;
  std::vector<double> date_profits;
};

/// `logs_per_seed[k]` are the test logs of seed k.
PolicyReport build_policy_report(const std::string& policy,
                                 const std::vector<std::vector<EpisodeLog>>& logs_per_seed,
                                 int horizon = kOverperformanceHorizon);

nlohmann::json to_json(const PolicyReport& report);

/// Flat table: one row per (policy, metric) with an optional date column.
void write_report_csv(std::ostream& out, const std::vector<PolicyReport>& reports);

}  // namespace amod
