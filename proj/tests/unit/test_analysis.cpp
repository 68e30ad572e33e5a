#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "amod/analysis/overperformance.hpp"
#include "amod/analysis/rejection.hpp"
#include "amod/analysis/report.hpp"
#include "amod/analysis/scores.hpp"
#include "amod/analysis/wilcoxon.hpp"
#include "amod/dispatch.hpp"
#include "support/fixtures.hpp"

namespace amod {
namespace {

constexpr double kHop = 0.459;

TEST(Overperformance, WorkedExampleGivesTwo) {
  const std::vector<OverperformanceRecord> records{{10.0, false, {5.0, 12.0, 14.0}},
                                                   {10.0, true, {8.0, 11.0, 12.0}}};
  const OverperformanceResult r = overperformance_ratio(records);
  EXPECT_DOUBLE_EQ(r.rejection_pool, 6.0);
  EXPECT_DOUBLE_EQ(r.acceptance_pool, 3.0);
  ASSERT_TRUE(r.ratio.has_value());
  EXPECT_DOUBLE_EQ(*r.ratio, 2.0);
}

TEST(Overperformance, ZeroAcceptancePoolIsUndefined) {
  const OverperformanceResult r = overperformance_ratio({{1.0, false, {2.0}}, {1.0, true, {0.5}}});
  EXPECT_FALSE(r.ratio.has_value());
  EXPECT_EQ(r.diagnostic, "acceptance pool is zero");
  EXPECT_EQ(overperformance_ratio(std::vector<OverperformanceRecord>{}).diagnostic, "both pools are zero");
}

RequestOutcome outcome(RequestId id, int step, ZoneId o, ZoneId d, std::optional<Money> best,
                       std::optional<ZoneId> best_zone, RequestStatus status, int dest_vehicles = 1) {
  RequestOutcome r;
  r.id = id;
  r.placement_step = step;
  r.origin = o;
  r.destination = d;
  r.trip_km = build_hex_grid(5, ZoneScale::small).distance_km(o, d);
  r.best_profit = best;
  r.best_vehicle_zone = best_zone;
  r.status = status;
  r.destination_vehicle_count = dest_vehicles;
  return r;
}

// A log with a real five-zone header and hand-written request outcomes.
EpisodeLog hand_log(std::vector<RequestOutcome> requests) {
  GreedyPolicy g;
  EpisodeLog log = rollout(g, testing::five_zone_config({1, 3}, 40), testing::make_stream({}, 5, 40));
  log.requests = std::move(requests);
  return log;
}

TEST(Overperformance, HandBuiltLog) {
  using S = RequestStatus;
  const EpisodeLog log = hand_log({
      outcome(0, 0, 1, 4, 0.5 * kHop, 1, S::rejected),  // later 1->3 and 1->2 trips earn kHop
      outcome(1, 2, 1, 3, kHop, 1, S::completed),
      outcome(2, 5, 1, 2, kHop, 1, S::completed),
      outcome(3, 12, 1, 3, kHop, 1, S::completed),
      outcome(4, 20, 3, 4, 0.5 * kHop, 3, S::completed),  // a later 3->1 earns kHop
      outcome(5, 25, 3, 1, std::nullopt, std::nullopt, S::rejected),
      outcome(6, 31, 3, 1, std::nullopt, std::nullopt, S::rejected),
  });
  const auto records = collect_overperformance_records({log});
  ASSERT_EQ(records.size(), 5u);
  EXPECT_EQ(records[0].subsequent_profits.size(), 2u);  // request 3 is 12 steps later
  EXPECT_EQ(records[4].subsequent_profits.size(), 1u);  // request 6 is 11 steps later
  const OverperformanceResult r = overperformance_ratio({log});
  EXPECT_NEAR(r.rejection_pool, kHop, 1e-12);
  EXPECT_NEAR(r.acceptance_pool, 0.5 * kHop, 1e-12);
  EXPECT_NEAR(*r.ratio, 2.0, 1e-12);
  EXPECT_EQ(r.rejected_records, 1u);
  EXPECT_EQ(r.accepted_records, 4u);
  // A shorter horizon drops request 2 from request 0's window.
  EXPECT_NEAR(overperformance_ratio({log}, 3).rejection_pool, 0.5 * kHop, 1e-12);
  EXPECT_THROW(collect_overperformance_records({log}, 0), std::invalid_argument);
}

TEST(Rejection, CountsProfitableRequestsByDestinationOccupancy) {
  using S = RequestStatus;
  std::vector<RequestOutcome> rs;
  // 10 profitable requests, 1 rejected: 10%.
  for (int i = 0; i < 10; ++i) rs.push_back(outcome(i, i, 1, 3, 0.2, 1, i == 0 ? S::rejected : S::completed));
  const RejectionBreakdown b = rejection_breakdown(hand_log(rs));
  EXPECT_EQ(b.overall.total, 10u);
  EXPECT_DOUBLE_EQ(*b.overall.rate(), 0.1);
  EXPECT_FALSE(b.empty_destination.rate().has_value());
  EXPECT_FALSE(b.gap().has_value());

  // Crowded destinations (3 vehicles) rejected 2 of 3; empty ones 1 of 4.
  rs.clear();
  for (int i = 0; i < 3; ++i) rs.push_back(outcome(i, i, 1, 3, 0.2, 1, i < 2 ? S::rejected : S::completed, 3));
  for (int i = 3; i < 7; ++i) rs.push_back(outcome(i, i, 1, 4, 0.2, 1, i == 3 ? S::rejected : S::completed, 0));
  rs.push_back(outcome(7, 7, 1, 4, 0.2, 1, S::rejected, 2));           // neither group
  rs.push_back(outcome(8, 8, 1, 4, -0.1, 1, S::rejected, 0));          // unprofitable
  rs.push_back(outcome(9, 9, 1, 4, std::nullopt, std::nullopt, S::rejected, 0));  // no feasible vehicle
  const RejectionBreakdown c = rejection_breakdown(hand_log(rs));
  EXPECT_EQ(c.overall.total, 8u);
  EXPECT_EQ(c.overall.rejected, 4u);
  EXPECT_NEAR(*c.crowded_destination.rate(), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(*c.empty_destination.rate(), 0.25, 1e-12);
  EXPECT_NEAR(*c.gap(), 2.0 / 3.0 - 0.25, 1e-12);
  EXPECT_EQ(mean_defined({0.1, std::nullopt, 0.3}), 0.2);
  EXPECT_FALSE(mean_defined({std::nullopt}).has_value());
}

TEST(Rejection, GreedyNeverRejectsProfitableServableRequests) {
  const EpisodeConfig cfg = testing::benchmark_instance();
  for (std::uint64_t s = 0; s < 5; ++s) {
    GreedyPolicy g;
    const EpisodeLog log = rollout(g, cfg, synth_stream(cfg.grid, testing::benchmark_demand(), s));
    // A profitable request needs a free vehicle in its origin zone; greedy
    // only turns it down when another request of the step took that vehicle.
    for (const RequestOutcome& r : log.requests) {
      if (!is_profitable(r) || r.status != RequestStatus::rejected) continue;
      const StepLog& step = log.steps[static_cast<std::size_t>(r.decision_step - 1)];
      bool contested = false;
      for (const Assignment& a : step.assignments) contested = contested || a.request != r.id;
      EXPECT_TRUE(contested);
    }
  }
}

TEST(Wilcoxon, AllPositiveSixPairs) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 6; ++i) pairs.push_back({i + 1.0, i});
  const WilcoxonResult r = wilcoxon_signed_rank(pairs);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.n, 6u);
  EXPECT_DOUBLE_EQ(r.w_plus, 21.0);
  EXPECT_DOUBLE_EQ(r.w_minus, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.03125);
}

TEST(Wilcoxon, RanksTiesAndZeros) {
  const std::vector<double> d{0.5, -0.5, 2.0, 1.0};
  EXPECT_EQ(signed_rank_magnitudes(d), (std::vector<double>{1.5, 1.5, 4.0, 3.0}));
  // Two zero differences are dropped, leaving five pairs.
  const std::vector<std::pair<double, double>> pairs{{1, 1}, {2, 2}, {3, 1}, {1, 2}, {4, 1}, {5, 1}, {2, 1}};
  const WilcoxonResult r = wilcoxon_signed_rank(pairs);
  EXPECT_EQ(r.n, 5u);
  EXPECT_DOUBLE_EQ(r.w_plus + r.w_minus, 15.0);
  EXPECT_DOUBLE_EQ(r.statistic, r.w_plus - r.w_minus);
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<std::pair<double, double>>(4, {1.0, 0.0})), std::invalid_argument);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  const std::vector<double> ranks{1, 2, 3.5, 3.5, 5};
  // Enumerate sign patterns by hand-rolled loop.
  const double t_obs = 1 + 2 + 3.5 - 3.5 + 5;
  int extreme = 0;
  for (int mask = 0; mask < 32; ++mask) {
    double t = 0;
    for (int k = 0; k < 5; ++k) t += (mask >> k & 1) ? ranks[k] : -ranks[k];
    extreme += std::abs(t) >= std::abs(t_obs) - 1e-12;
  }
  EXPECT_DOUBLE_EQ(exact_signed_rank_p(ranks, t_obs), extreme / 32.0);
}

TEST(Wilcoxon, NormalApproximationBeyondTwelve) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 15; ++i) pairs.push_back({static_cast<double>(i), 0.0});
  const WilcoxonResult r = wilcoxon_signed_rank(pairs);
  EXPECT_FALSE(r.exact);
  const double var = 15.0 * 16.0 * 31.0 / 6.0;
  EXPECT_NEAR(r.p_value, std::erfc(120.0 / std::sqrt(var) / std::sqrt(2.0)), 1e-12);
}

TEST(Scores, AggregateAveragesSeedsAndExcludesDivergedRuns) {
  const std::vector<std::string> dates{"d1", "d2"};
  const std::vector<double> greedy{10.0, 20.0};
  const std::vector<RunScores> runs{{"LRA", 1, {11.0, 22.0}, 9.0},
                                    {"LRA", 2, {13.0, 18.0}, 8.0},
                                    {"LRA", 3, {0.0, 0.0}, 1.0},  // diverged
                                    {"COMAscd", 1, {12.0, 24.0}, 10.0}};
  AggregateOptions opt;
  opt.greedy_validation = 8.0;
  const ScoreTable t = aggregate_scores(dates, "greedy", greedy, runs, opt);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"greedy", "LRA", "COMAscd"}));
  EXPECT_DOUBLE_EQ(t.values[0][1], 12.0);
  EXPECT_DOUBLE_EQ(t.values[1][1], 20.0);
  EXPECT_DOUBLE_EQ(t.delta_percent[0][1], 20.0);
  EXPECT_DOUBLE_EQ(t.delta_percent[1][2], 20.0);
  EXPECT_DOUBLE_EQ(t.column_means[0], 15.0);
  EXPECT_DOUBLE_EQ(t.column_means[1], 16.0);
  EXPECT_NEAR(t.column_delta_percent[1], 100.0 / 15.0, 1e-12);
  EXPECT_EQ(t.excluded, (std::vector<std::string>{"LRA/seed3"}));
  EXPECT_EQ(t.seeds[1], (std::vector<std::uint64_t>{1, 2}));
  EXPECT_THROW(aggregate_scores(dates, "greedy", greedy, {{"X", 1, {1.0}, {}}}), std::invalid_argument);
  const ScoreTable only = aggregate_scores(dates, "greedy", greedy, {{"X", 1, {1.0, 1.0}, 1.0}}, opt);
  EXPECT_EQ(only.columns, (std::vector<std::string>{"greedy"}));
  EXPECT_EQ(only.excluded, (std::vector<std::string>{"X/seed1"}));
}

TEST(Scores, Helpers) {
  EXPECT_DOUBLE_EQ(relative_delta_percent(9.0, -10.0), 190.0);
  EXPECT_DOUBLE_EQ(relative_delta_percent(9.0, 10.0), -10.0);
  EXPECT_TRUE(diverged(3.9, 8.0));
  EXPECT_FALSE(diverged(4.0, 8.0));
  EXPECT_THROW(mean(std::vector<double>{}), std::invalid_argument);
}

TEST(Report, PoolsSeedsAndSumsDates) {
  using S = RequestStatus;
  EpisodeLog a = hand_log({outcome(0, 0, 1, 3, 0.2, 1, S::rejected, 0), outcome(1, 1, 1, 3, 0.2, 1, S::completed, 0)});
  a.header.date_label = "day1";
  a.total_profit = 3.0;
  EpisodeLog b = a;
  b.header.date_label = "day2";
  b.total_profit = 5.0;
  EpisodeLog c = hand_log({outcome(0, 0, 1, 3, 0.2, 1, S::completed, 0)});
  c.header.date_label = "day1";
  c.total_profit = 7.0;
  EpisodeLog d = c;
  d.header.date_label = "day2";
  d.total_profit = 1.0;
  const PolicyReport r = build_policy_report("LRA", {{a, b}, {c, d}});
  EXPECT_EQ(r.seeds, 2u);
  EXPECT_EQ(r.pooled.overall.total, 6u);
  EXPECT_NEAR(*r.pooled.overall.rate(), 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(*r.seed_mean_overall, (0.5 + 0.0) / 2.0, 1e-12);
  EXPECT_EQ(r.dates, (std::vector<std::string>{"day1", "day2"}));
  EXPECT_DOUBLE_EQ(r.date_profits[0], 5.0);
  EXPECT_DOUBLE_EQ(r.date_profits[1], 3.0);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("policy"), "LRA");
  std::ostringstream csv;
  write_report_csv(csv, {r});
  EXPECT_EQ(csv.str().rfind("policy,metric,date,value\n", 0), 0u);
  EXPECT_NE(csv.str().find("LRA,date_profit,day2,3"), std::string::npos);
}

}  // namespace
}  // namespace amod
