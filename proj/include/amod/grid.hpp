#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace amod {

using ZoneId = int;

enum class ZoneScale { small, large };

/// Axial hex coordinate (pointy-top orientation, r grows southward).
struct HexCoord {
  int q = 0;
  int r = 0;

  friend bool operator==(const HexCoord&, const HexCoord&) = default;
};

/// Planar position in meters relative to the grid origin.
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

ZoneScale parse_zone_scale(const std::string& name);
std::string to_string(ZoneScale scale);

/// Hexagonal zone discretization with precomputed all-pairs shortest paths.
///
/// Travel between adjacent zones costs `steps_between_neighbors` time steps and
/// `neighbor_distance_m` meters; longer trips follow a breadth-first shortest
/// path over the zone adjacency, so every hop costs the same.
class ZoneGrid {
 public:
  ZoneGrid() = default;
  ZoneGrid(std::vector<HexCoord> coords, double neighbor_distance_m,
           int steps_between_neighbors);

  std::size_t size() const { return coords_.size(); }
  const HexCoord& coord(ZoneId z) const { return coords_.at(static_cast<std::size_t>(z)); }
  std::span<const ZoneId> neighbors(ZoneId z) const {
    return adjacency_.at(static_cast<std::size_t>(z));
  }
  bool adjacent(ZoneId a, ZoneId b) const;

  double neighbor_distance_m() const { return neighbor_distance_m_; }
  int steps_between_neighbors() const { return steps_between_neighbors_; }

  int hops(ZoneId a, ZoneId b) const { return hops_[index(a, b)]; }
  int travel_steps(ZoneId a, ZoneId b) const {
    return hops(a, b) * steps_between_neighbors_;
  }
  double distance_m(ZoneId a, ZoneId b) const {
    return hops(a, b) * neighbor_distance_m_;
  }
  double distance_km(ZoneId a, ZoneId b) const { return distance_m(a, b) / 1000.0; }

  /// First zone on the lowest-id shortest path from `from` toward `to`.
  /// Returns `from` when the two coincide.
  ZoneId next_hop(ZoneId from, ZoneId to) const { return next_hop_[index(from, to)]; }

  PlanarPoint center(ZoneId z) const;
  /// Zone whose hexagon contains the point, or -1 when the point is outside.
  ZoneId locate(PlanarPoint p) const;

  /// Hex-cell size (center to corner) in meters.
  double cell_radius_m() const;

 private:
  std::size_t index(ZoneId a, ZoneId b) const {
    return static_cast<std::size_t>(a) * coords_.size() + static_cast<std::size_t>(b);
  }

  std::vector<HexCoord> coords_;
  std::vector<std::vector<ZoneId>> adjacency_;
  std::vector<int> hops_;
  std::vector<ZoneId> next_hop_;
  double neighbor_distance_m_ = 0.0;
  int steps_between_neighbors_ = 0;
};

/// Stored layout for 5, 11, or 38 zones; throws std::invalid_argument otherwise.
ZoneGrid build_hex_grid(int n_zones, ZoneScale scale);

/// Axial coordinates of a stored layout.
std::vector<HexCoord> stored_layout(int n_zones);

}  // namespace amod
