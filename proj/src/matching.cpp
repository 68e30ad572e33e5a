#include "amod/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace amod {
namespace {

using Wide = __int128;

constexpr double kQuantum = 1099511627776.0;  // 2^40
constexpr double kMaxWeight = 1024.0;

int bit_width(Wide v) {
  int bits = 0;
  while (v > 0) {
    v >>= 1;
    ++bits;
  }
  return bits;
}

// Hungarian method (potentials + shortest augmenting paths) minimizing
// cost over an n x m matrix with n <= m. Returns column -> row (1-based,
// 0 = unassigned).
std::vector<int> hungarian(const std::vector<std::vector<Wide>>& cost, int n, int m) {
  const Wide inf = std::numeric_limits<Wide>::max() / 4;
  std::vector<Wide> u(static_cast<std::size_t>(n) + 1, 0), v(static_cast<std::size_t>(m) + 1, 0);
  std::vector<int> p(static_cast<std::size_t>(m) + 1, 0), way(static_cast<std::size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Wide> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      Wide delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) continue;
        const Wide cur = cost[static_cast<std::size_t>(i0) - 1][js - 1] -
                         u[static_cast<std::size_t>(i0)] - v[js];
        if (cur < minv[js]) {
          minv[js] = cur;
          way[js] = j0;
        }
        if (minv[js] < delta) {
          delta = minv[js];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) {
          u[static_cast<std::size_t>(p[js])] += delta;
          v[js] -= delta;
        } else {
          minv[js] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  return p;
}

}  // namespace

std::vector<std::pair<int, int>> max_weight_matching(int n_left, int n_right,
                                                     std::span<const WeightedEdge> edges) {
  if (n_left < 0 || n_right < 0) throw std::invalid_argument("negative matching side");
  if (n_left == 0 || n_right == 0) return {};

  const Wide ranks = static_cast<Wide>(n_left) * n_right;
  const Wide max_bonus_total = static_cast<Wide>(std::min(n_left, n_right)) * ranks * ranks;
  const int shift = bit_width(max_bonus_total) + 1;
  if (shift > 62) throw std::invalid_argument("matching instance too large");

  // weight[l][r] in the tie-break-augmented integer scale; 0 = no edge.
  std::vector<std::vector<Wide>> weight(static_cast<std::size_t>(n_left),
                                        std::vector<Wide>(static_cast<std::size_t>(n_right), 0));
  for (const auto& e : edges) {
    if (e.left < 0 || e.left >= n_left || e.right < 0 || e.right >= n_right)
      throw std::invalid_argument("matching edge out of range");
    if (!std::isfinite(e.weight) || e.weight > kMaxWeight)
      throw std::invalid_argument("matching weight must be finite and <= 1024");
    const auto q = static_cast<long long>(std::llround(e.weight * kQuantum));
    if (q <= 0) continue;
    const Wide rank = static_cast<Wide>(e.left) * n_right + e.right;
    const Wide bonus = (ranks - rank) * (ranks - rank);
    weight[static_cast<std::size_t>(e.left)][static_cast<std::size_t>(e.right)] =
        (static_cast<Wide>(q) << shift) + bonus;
  }

  const bool transpose = n_left > n_right;
  const int n = transpose ? n_right : n_left;
  const int m = transpose ? n_left : n_right;
  std::vector<std::vector<Wide>> cost(static_cast<std::size_t>(n), std::vector<Wide>(static_cast<std::size_t>(m), 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const Wide w = transpose ? weight[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]
                               : weight[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = -w;
    }

  const auto col_to_row = hungarian(cost, n, m);
  std::vector<std::pair<int, int>> out;
  for (int j = 1; j <= m; ++j) {
    const int i = col_to_row[static_cast<std::size_t>(j)];
    if (i == 0) continue;
    const int l = transpose ? j - 1 : i - 1;
    const int r = transpose ? i - 1 : j - 1;
    if (weight[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)] > 0) out.emplace_back(l, r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace amod
