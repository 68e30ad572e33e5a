#include "amod/analysis/report.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace amod {
namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json rate_json(const RateEstimate& r) {
  return {{"rejected", r.rejected}, {"total", r.total}, {"rate", optional_json(r.rate())}};
}

std::string csv_value(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(17) << *v;
  return s.str();
}

}  // namespace

PolicyReport build_policy_report(const std::string& policy,
                                 const std::vector<std::vector<EpisodeLog>>& logs_per_seed,
                                 int horizon) {
  if (logs_per_seed.empty()) throw std::invalid_argument("policy report needs at least one seed");
  PolicyReport r;
  r.policy = policy;
  r.seeds = logs_per_seed.size();

  std::vector<EpisodeLog> all;
  std::vector<std::optional<double>> overall, empty, crowded, gap;
  std::vector<std::vector<double>> per_seed_dates;
  for (const auto& seed_logs : logs_per_seed) {
    const RejectionBreakdown b = rejection_breakdown(seed_logs);
    overall.push_back(b.overall.rate());
    empty.push_back(b.empty_destination.rate());
    crowded.push_back(b.crowded_destination.rate());
    gap.push_back(b.gap());
    std::vector<double> sums(r.dates.size(), 0.0);
    for (const EpisodeLog& log : seed_logs) {
      auto it = std::find(r.dates.begin(), r.dates.end(), log.header.date_label);
      if (it == r.dates.end()) {
        r.dates.push_back(log.header.date_label);
        sums.push_back(0.0);
        it = r.dates.end() - 1;
      }
      sums[static_cast<std::size_t>(it - r.dates.begin())] += log.total_profit;
      all.push_back(log);
    }
    per_seed_dates.push_back(std::move(sums));
  }
  r.pooled = rejection_breakdown(all);
  r.seed_mean_overall = mean_defined(overall);
  r.seed_mean_empty = mean_defined(empty);
  r.seed_mean_crowded = mean_defined(crowded);
  r.seed_mean_gap = mean_defined(gap);
  r.overperformance = overperformance_ratio(all, horizon);

  r.date_profits.assign(r.dates.size(), 0.0);
  for (auto& sums : per_seed_dates) {
    sums.resize(r.dates.size(), 0.0);
    for (std::size_t d = 0; d < sums.size(); ++d) r.date_profits[d] += sums[d];
  }
  for (double& p : r.date_profits) p /= static_cast<double>(r.seeds);
  return r;
}

nlohmann::json to_json(const PolicyReport& r) {
  nlohmann::json dates = nlohmann::json::array();
  for (std::size_t d = 0; d < r.dates.size(); ++d)
    dates.push_back({{"date", r.dates[d]}, {"profit", r.date_profits[d]}});
  const OverperformanceResult& o = r.overperformance;
  return {
      {"policy", r.policy},
      {"seeds", r.seeds},
      {"rejection",
       {{"pooled",
         {{"overall", rate_json(r.pooled.overall)},
          {"empty_destination", rate_json(r.pooled.empty_destination)},
          {"crowded_destination", rate_json(r.pooled.crowded_destination)},
          {"gap", optional_json(r.pooled.gap())}}},
        {"seed_mean",
         {{"overall", optional_json(r.seed_mean_overall)},
          {"empty_destination", optional_json(r.seed_mean_empty)},
          {"crowded_destination", optional_json(r.seed_mean_crowded)},
          {"gap", optional_json(r.seed_mean_gap)}}}}},
      {"overperformance",
       {{"ratio", optional_json(o.ratio)},
        {"rejection_pool", o.rejection_pool},
        {"acceptance_pool", o.acceptance_pool},
        {"rejected_records", o.rejected_records},
        {"accepted_records", o.accepted_records},
        {"diagnostic", o.diagnostic}}},
      {"date_profits", dates},
  };
}

void write_report_csv(std::ostream& out, const std::vector<PolicyReport>& reports) {
  out << "policy,metric,date,value\n";
  for (const PolicyReport& r : reports) {
    const auto row = [&](const std::string& metric, const std::optional<double>& v) {
      out << r.policy << ',' << metric << ",," << csv_value(v) << '\n';
    };
    row("rejection_overall_pooled", r.pooled.overall.rate());
    row("rejection_empty_pooled", r.pooled.empty_destination.rate());
    row("rejection_crowded_pooled", r.pooled.crowded_destination.rate());
    row("rejection_gap_pooled", r.pooled.gap());
    row("rejection_overall_seed_mean", r.seed_mean_overall);
    row("rejection_empty_seed_mean", r.seed_mean_empty);
    row("rejection_crowded_seed_mean", r.seed_mean_crowded);
    row("rejection_gap_seed_mean", r.seed_mean_gap);
    row("overperformance_ratio", r.overperformance.ratio);
    for (std::size_t d = 0; d < r.dates.size(); ++d)
      out << r.policy << ",date_profit," << r.dates[d] << ',' << csv_value(r.date_profits[d]) << '\n';
  }
}

}  // namespace amod
