#include "amod/analysis/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace amod {

std::vector<double> signed_rank_magnitudes(std::span<const double> differences) {
  const std::size_t n = differences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(differences[a]) < std::abs(differences[b]);
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(differences[order[j + 1]]) == std::abs(differences[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double exact_signed_rank_p(std::span<const double> ranks, double statistic) {
  const std::size_t n = ranks.size();
  if (n > 24) throw std::invalid_argument("exact signed-rank enumeration is limited to 24 pairs");
  const double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
  const double threshold = std::abs(statistic) - 1e-9 * std::max(1.0, total);
  const std::uint64_t count = 1ULL << n;
  std::uint64_t extreme = 0;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ULL << i)) plus += ranks[i];
    if (std::abs(2.0 * plus - total) >= threshold) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(count);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < kWilcoxonMinPairs)
    throw std::invalid_argument("signed-rank test needs at least 5 pairs");
  std::vector<double> d;
  for (const auto& [a, b] : pairs) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("signed-rank test needs finite scores");
    if (a - b != 0.0) d.push_back(a - b);
  }
  WilcoxonResult res;
  res.n = d.size();
  if (d.empty()) {
    res.warnings.push_back("all differences are zero");
    return res;
  }
  const std::vector<double> ranks = signed_rank_magnitudes(d);
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];
  res.statistic = res.w_plus - res.w_minus;

  if (res.n <= kWilcoxonExactMax) {
    res.exact = true;
    res.p_value = exact_signed_rank_p(ranks, res.statistic);
    return res;
  }
  // Var(W+) with ties; T = 2 W+ - n(n+1)/2 so Var(T) = 4 Var(W+).
  const double n = static_cast<double>(res.n);
  double tie = 0.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie += t * t * t - t;
    i = j;
  }
  const double var_w = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie / 48.0;
  if (var_w <= 0.0) {
    res.warnings.push_back("degenerate variance");
    return res;
  }
  const double z = res.statistic / (2.0 * std::sqrt(var_w));
  res.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  return res;
}

}  // namespace amod
