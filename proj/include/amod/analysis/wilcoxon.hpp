#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace amod {

struct WilcoxonResult {
  /// Signed-rank statistic W+ - W- over the non-zero differences a - b.
  double statistic = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  /// Pairs left after dropping zero differences.
  std::size_t n = 0;
  double p_value = 1.0;
  bool exact = false;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kWilcoxonMinPairs = 5;
inline constexpr std::size_t kWilcoxonExactMax = 12;

/// Two-sided Wilcoxon signed-rank test on paired scores (a, b).
///
/// Zero differences are dropped and tied magnitudes share their average
/// rank. Up to 12 remaining pairs the p-value comes from enumerating all 2^n
/// sign assignments; beyond that from the normal approximation with the tie
/// correction (no continuity correction). Throws std::invalid_argument for
/// fewer than 5 pairs.
WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs);

/// Average ranks (1-based) of |d| over the given non-zero differences.
std::vector<double> signed_rank_magnitudes(std::span<const double> differences);

/// P(|T| >= |t|) under independent fair signs for the given ranks.
double exact_signed_rank_p(std::span<const double> ranks, double statistic);

}  // namespace amod
