#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace amod {

/// Test profits of one trained run (one algorithm, one seed), one value per
/// date in the table's date order.
struct RunScores {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<double> per_date;
  /// Best validation score, used for the divergence check.
  std::optional<double> validation_best;
};

struct AggregateOptions {
  /// Greedy's validation score; runs whose best validation falls below
  /// floor * greedy are excluded. No exclusion when unset.
  std::optional<double> greedy_validation;
  double divergence_floor = 0.5;
};

struct ScoreTable {
  std::vector<std::string> dates;
  /// Baseline first, then algorithms in order of first appearance.
  std::vector<std::string> columns;
  /// values[date][column], seed-averaged over the kept runs.
  std::vector<std::vector<double>> values;
  /// Relative difference to the baseline column in percent.
  std::vector<std::vector<double>> delta_percent;
  /// Column means over dates.
  std::vector<double> column_means;
  std::vector<double> column_delta_percent;
  /// Seeds kept per column.
  std::vector<std::vector<std::uint64_t>> seeds;
  /// "<algorithm>/seed<k>" of every excluded run.
  std::vector<std::string> excluded;
};

double mean(std::span<const double> xs);
/// (candidate - baseline) / |baseline| * 100.
double relative_delta_percent(double candidate, double baseline);
bool diverged(double validation_best, double greedy_validation, double floor = 0.5);

/// Throws std::invalid_argument when a run's date count differs from
/// `dates`. Algorithms with no kept run get no column.
ScoreTable aggregate_scores(const std::vector<std::string>& dates, const std::string& baseline_name,
                            const std::vector<double>& baseline, const std::vector<RunScores>& runs,
                            const AggregateOptions& options = {});

}  // namespace amod
