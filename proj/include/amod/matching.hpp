#pragma once

#include <span>
#include <utility>
#include <vector>

namespace amod {

struct WeightedEdge {
  int left = 0;
  int right = 0;
  double weight = 0.0;
};

/// Exact maximum-weight bipartite matching (not necessarily perfect).
///
/// Weights are quantized to 2^-40 and solved with the Hungarian method in
/// 128-bit integer arithmetic, so equal-weight alternatives compare exactly.
/// Ties are resolved toward pairs with lower (left, right) rank. Edges with
/// non-positive weight are ignored; weights above 1024 are rejected.
/// Returns the matched (left, right) pairs sorted by left index.
std::vector<std::pair<int, int>> max_weight_matching(int n_left, int n_right,
                                                     std::span<const WeightedEdge> edges);

}  // namespace amod
