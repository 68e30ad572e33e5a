#include "amod/grid.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace amod {
namespace {

constexpr std::array<HexCoord, 6> kDirections{{{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}}};

constexpr double kSmallNeighborMeters = 459.0;
constexpr double kLargeNeighborMeters = 917.0;
constexpr int kSmallNeighborSteps = 2;
constexpr int kLargeNeighborSteps = 5;

std::vector<HexCoord> layout_eleven() {
  return {{0, 0},  {1, 0},  {-1, 0}, {-1, 1}, {0, 1},  {1, -1},
          {0, -1}, {1, -2}, {0, -2}, {2, -2}, {-1, -1}};
}

// Ten rows of four cells forming a north-south strip, minus the two
// south-eastern cells.
std::vector<HexCoord> layout_thirty_eight() {
  std::vector<HexCoord> out;
  for (int r = 0; r < 10; ++r) {
    const int q0 = -(r / 2);
    const int width = (r == 9) ? 2 : 4;
    for (int k = 0; k < width; ++k) out.push_back({q0 + k, r});
  }
  return out;
}

}  // namespace

ZoneScale parse_zone_scale(const std::string& name) {
  if (name == "small") return ZoneScale::small;
  if (name == "large") return ZoneScale::large;
  throw std::invalid_argument("unknown zone scale '" + name + "'");
}

std::string to_string(ZoneScale scale) {
  return scale == ZoneScale::small ? "small" : "large";
}

std::vector<HexCoord> stored_layout(int n_zones) {
  switch (n_zones) {
    case 5: {
      // Southern five cells of the 11-zone layout.
      auto eleven = layout_eleven();
      return {eleven.begin(), eleven.begin() + 5};
    }
    case 11:
      return layout_eleven();
    case 38:
      return layout_thirty_eight();
    default:
      throw std::invalid_argument("unknown zone layout: " + std::to_string(n_zones) +
                                  " (expected 5, 11 or 38)");
  }
}

ZoneGrid build_hex_grid(int n_zones, ZoneScale scale) {
  const bool small = scale == ZoneScale::small;
  return ZoneGrid(stored_layout(n_zones), small ? kSmallNeighborMeters : kLargeNeighborMeters,
                  small ? kSmallNeighborSteps : kLargeNeighborSteps);
}

ZoneGrid::ZoneGrid(std::vector<HexCoord> coords, double neighbor_distance_m,
                   int steps_between_neighbors)
    : coords_(std::move(coords)),
      neighbor_distance_m_(neighbor_distance_m),
      steps_between_neighbors_(steps_between_neighbors) {
  if (coords_.empty()) throw std::invalid_argument("zone grid needs at least one zone");
  if (neighbor_distance_m_ <= 0.0 || steps_between_neighbors_ <= 0)
    throw std::invalid_argument("neighbor distance and steps must be positive");

  const std::size_t n = coords_.size();
  adjacency_.assign(n, {});
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (const auto& d : kDirections) {
        if (coords_[a].q + d.q == coords_[b].q && coords_[a].r + d.r == coords_[b].r) {
          adjacency_[a].push_back(static_cast<ZoneId>(b));
        }
      }
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (coords_[a] == coords_[b]) throw std::invalid_argument("duplicate zone coordinate");
    }
  }

  hops_.assign(n * n, -1);
  next_hop_.assign(n * n, -1);
  for (std::size_t src = 0; src < n; ++src) {
    // BFS from src; the first hop of each reached zone is inherited from its
    // parent, and neighbors are visited in ascending id order.
    std::deque<ZoneId> frontier{static_cast<ZoneId>(src)};
    hops_[index(static_cast<ZoneId>(src), static_cast<ZoneId>(src))] = 0;
    next_hop_[index(static_cast<ZoneId>(src), static_cast<ZoneId>(src))] = static_cast<ZoneId>(src);
    while (!frontier.empty()) {
      const ZoneId cur = frontier.front();
      frontier.pop_front();
      const int h = hops_[index(static_cast<ZoneId>(src), cur)];
      for (ZoneId nb : adjacency_[static_cast<std::size_t>(cur)]) {
        auto& slot = hops_[index(static_cast<ZoneId>(src), nb)];
        if (slot >= 0) continue;
        slot = h + 1;
        next_hop_[index(static_cast<ZoneId>(src), nb)] =
            (h == 0) ? nb : next_hop_[index(static_cast<ZoneId>(src), cur)];
        frontier.push_back(nb);
      }
    }
  }
  for (int h : hops_) {
    if (h < 0) throw std::invalid_argument("zone layout is not connected");
  }
}

bool ZoneGrid::adjacent(ZoneId a, ZoneId b) const { return hops(a, b) == 1; }

double ZoneGrid::cell_radius_m() const { return neighbor_distance_m_ / std::sqrt(3.0); }

PlanarPoint ZoneGrid::center(ZoneId z) const {
  const auto& c = coord(z);
  const double size = cell_radius_m();
  return {size * std::sqrt(3.0) * (c.q + c.r / 2.0), size * 1.5 * c.r};
}

ZoneId ZoneGrid::locate(PlanarPoint p) const {
  const double size = cell_radius_m();
  const double fq = (std::sqrt(3.0) / 3.0 * p.x - p.y / 3.0) / size;
  const double fr = (2.0 / 3.0 * p.y) / size;
  const double fs = -fq - fr;
  double rq = std::round(fq);
  double rr = std::round(fr);
  const double rs = std::round(fs);
  const double dq = std::abs(rq - fq);
  const double dr = std::abs(rr - fr);
  const double ds = std::abs(rs - fs);
  if (dq > dr && dq > ds) {
    rq = -rr - rs;
  } else if (dr > ds) {
    rr = -rq - rs;
  }
  const HexCoord cell{static_cast<int>(rq), static_cast<int>(rr)};
  for (std::size_t z = 0; z < coords_.size(); ++z) {
    if (coords_[z] == cell) return static_cast<ZoneId>(z);
  }
  return -1;
}

}  // namespace amod
