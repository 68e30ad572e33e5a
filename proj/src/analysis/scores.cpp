#include "amod/analysis/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace amod {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of an empty set");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double relative_delta_percent(double candidate, double baseline) {
  if (baseline == 0.0) return candidate == 0.0 ? 0.0 : std::copysign(INFINITY, candidate);
  return (candidate - baseline) / std::abs(baseline) * 100.0;
}

bool diverged(double validation_best, double greedy_validation, double floor) {
  return validation_best < floor * greedy_validation;
}

ScoreTable aggregate_scores(const std::vector<std::string>& dates, const std::string& baseline_name,
                            const std::vector<double>& baseline, const std::vector<RunScores>& runs,
                            const AggregateOptions& options) {
  if (baseline.size() != dates.size()) throw std::invalid_argument("baseline needs one score per date");
  ScoreTable t;
  t.dates = dates;
  t.columns.push_back(baseline_name);
  t.seeds.emplace_back();
  for (const RunScores& r : runs) {
    if (r.per_date.size() != dates.size())
      throw std::invalid_argument("run " + r.algorithm + " has " + std::to_string(r.per_date.size()) +
                                  " dates, expected " + std::to_string(dates.size()));
    if (std::find(t.columns.begin(), t.columns.end(), r.algorithm) == t.columns.end()) {
      t.columns.push_back(r.algorithm);
      t.seeds.emplace_back();
    }
  }

  const std::size_t nd = dates.size();
  std::size_t nc = t.columns.size();
  std::vector<std::vector<double>> sums(nd, std::vector<double>(nc, 0.0));
  std::vector<int> kept(nc, 0);
  for (std::size_t d = 0; d < nd; ++d) sums[d][0] = baseline[d];
  kept[0] = 1;
  for (const RunScores& r : runs) {
    const auto c = static_cast<std::size_t>(std::find(t.columns.begin(), t.columns.end(), r.algorithm) - t.columns.begin());
    if (options.greedy_validation && r.validation_best &&
        diverged(*r.validation_best, *options.greedy_validation, options.divergence_floor)) {
      t.excluded.push_back(r.algorithm + "/seed" + std::to_string(r.seed));
      continue;
    }
    for (std::size_t d = 0; d < nd; ++d) sums[d][c] += r.per_date[d];
    ++kept[c];
    t.seeds[c].push_back(r.seed);
  }
  // An algorithm whose every run diverged has no column; its runs stay
  // listed in `excluded`.
  for (std::size_t c = nc; c-- > 1;) {
    if (kept[c] > 0) continue;
    t.columns.erase(t.columns.begin() + static_cast<std::ptrdiff_t>(c));
    t.seeds.erase(t.seeds.begin() + static_cast<std::ptrdiff_t>(c));
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(c));
    for (auto& row : sums) row.erase(row.begin() + static_cast<std::ptrdiff_t>(c));
  }
  nc = t.columns.size();

  t.values.assign(nd, std::vector<double>(nc));
  t.delta_percent.assign(nd, std::vector<double>(nc));
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t c = 0; c < nc; ++c) {
      t.values[d][c] = sums[d][c] / kept[c];
      t.delta_percent[d][c] = relative_delta_percent(t.values[d][c], t.values[d][0]);
    }
  }
  t.column_means.assign(nc, 0.0);
  t.column_delta_percent.assign(nc, 0.0);
  if (nd > 0) {
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t d = 0; d < nd; ++d) t.column_means[c] += t.values[d][c];
      t.column_means[c] /= static_cast<double>(nd);
    }
    for (std::size_t c = 0; c < nc; ++c)
      t.column_delta_percent[c] = relative_delta_percent(t.column_means[c], t.column_means[0]);
  }
  return t;
}

}  // namespace amod
