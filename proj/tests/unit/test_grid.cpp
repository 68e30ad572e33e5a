#include <gtest/gtest.h>

#include <queue>
#include <set>

#include "amod/grid.hpp"
#include "support/oracles.hpp"

namespace amod {
namespace {

using testing::bfs_hops;

TEST(ZoneGrid, AdjacentSmallZonesTakeTwoStepsAnd459Meters) {
  const ZoneGrid g = build_hex_grid(5, ZoneScale::small);
  ASSERT_TRUE(g.adjacent(0, 1));
  EXPECT_EQ(g.travel_steps(0, 1), 2);
  EXPECT_DOUBLE_EQ(g.distance_m(0, 1), 459.0);
}

TEST(ZoneGrid, LargeScaleUses917MetersAndFiveSteps) {
  const ZoneGrid g = build_hex_grid(38, ZoneScale::large);
  const ZoneId n = g.neighbors(0).front();
  EXPECT_EQ(g.travel_steps(0, n), 5);
  EXPECT_DOUBLE_EQ(g.distance_m(0, n), 917.0);
}

TEST(ZoneGrid, DiagonalIsZero) {
  const ZoneGrid g = build_hex_grid(11, ZoneScale::small);
  for (ZoneId z = 0; z < static_cast<ZoneId>(g.size()); ++z) {
    EXPECT_EQ(g.travel_steps(z, z), 0);
    EXPECT_EQ(g.distance_m(z, z), 0.0);
  }
}

TEST(ZoneGrid, TwoHopPairInFiveZoneLayout) {
  const ZoneGrid g = build_hex_grid(5, ZoneScale::small);
  const auto hops = bfs_hops(stored_layout(5));
  int found = 0;
  for (ZoneId a = 0; a < 5; ++a)
    for (ZoneId b = 0; b < 5; ++b)
      if (hops[a][b] == 2) {
        EXPECT_EQ(g.travel_steps(a, b), 4);
        EXPECT_DOUBLE_EQ(g.distance_m(a, b), 918.0);
        ++found;
      }
  EXPECT_GT(found, 0);
}

class LayoutTest : public ::testing::TestWithParam<int> {};

TEST_P(LayoutTest, MatricesMatchIndependentBfs) {
  const ZoneGrid g = build_hex_grid(GetParam(), ZoneScale::small);
  const auto hops = bfs_hops(stored_layout(GetParam()));
  for (ZoneId a = 0; a < static_cast<ZoneId>(g.size()); ++a)
    for (ZoneId b = 0; b < static_cast<ZoneId>(g.size()); ++b) {
      ASSERT_GE(hops[a][b], 0) << "layout must be connected";
      EXPECT_EQ(g.hops(a, b), hops[a][b]);
      EXPECT_EQ(g.travel_steps(a, b), 2 * hops[a][b]);
    }
}

TEST_P(LayoutTest, SymmetricAndTriangleInequality) {
  const ZoneGrid g = build_hex_grid(GetParam(), ZoneScale::large);
  const auto n = static_cast<ZoneId>(g.size());
  for (ZoneId a = 0; a < n; ++a)
    for (ZoneId b = 0; b < n; ++b) {
      EXPECT_EQ(g.travel_steps(a, b), g.travel_steps(b, a));
      EXPECT_EQ(g.distance_m(a, b), g.distance_m(b, a));
      for (ZoneId c = 0; c < n; ++c) EXPECT_LE(g.distance_m(a, c), g.distance_m(a, b) + g.distance_m(b, c) + 1e-9);
    }
}

TEST_P(LayoutTest, AtMostSixNeighborsAndNextHopIsAdjacent) {
  const ZoneGrid g = build_hex_grid(GetParam(), ZoneScale::small);
  const auto n = static_cast<ZoneId>(g.size());
  for (ZoneId a = 0; a < n; ++a) {
    EXPECT_LE(g.neighbors(a).size(), 6u);
    for (ZoneId b = 0; b < n; ++b) {
      const ZoneId h = g.next_hop(a, b);
      if (a == b) {
        EXPECT_EQ(h, a);
      } else {
        EXPECT_TRUE(g.adjacent(a, h));
        EXPECT_EQ(g.hops(h, b), g.hops(a, b) - 1);
      }
    }
  }
}

TEST_P(LayoutTest, LocateInvertsCenter) {
  const ZoneGrid g = build_hex_grid(GetParam(), ZoneScale::small);
  for (ZoneId z = 0; z < static_cast<ZoneId>(g.size()); ++z) EXPECT_EQ(g.locate(g.center(z)), z);
  EXPECT_EQ(g.locate({1e6, 1e6}), -1);
}

INSTANTIATE_TEST_SUITE_P(StoredLayouts, LayoutTest, ::testing::Values(5, 11, 38));

TEST(ZoneGrid, InteriorZonesOfLargeLayoutHaveSixNeighbors) {
  const ZoneGrid g = build_hex_grid(38, ZoneScale::large);
  int interior = 0;
  for (ZoneId z = 0; z < 38; ++z) interior += g.neighbors(z).size() == 6 ? 1 : 0;
  EXPECT_GT(interior, 0);
}

TEST(ZoneGrid, UnknownLayoutThrows) {
  EXPECT_THROW(build_hex_grid(7, ZoneScale::small), std::invalid_argument);
  EXPECT_THROW(parse_zone_scale("medium"), std::invalid_argument);
}

}  // namespace
}  // namespace amod
