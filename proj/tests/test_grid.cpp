#include <vnsmear/grid.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace vnsmear;

TEST(Grid, ThreePointGrid) {
  const auto g = make_grid(-1.0, 1.0, 3);
  EXPECT_EQ(g.size(), 3);
  EXPECT_DOUBLE_EQ(g.spacing(), 1.0);
  EXPECT_DOUBLE_EQ(g.point(0), -1.0);
  EXPECT_DOUBLE_EQ(g.point(1), 0.0);
  EXPECT_DOUBLE_EQ(g.point(2), 1.0);
}

TEST(Grid, FineSpacing) {
  const auto g = make_grid(-10.0, 10.0, 2001);
  EXPECT_NEAR(g.spacing(), 0.01, 1e-15);
  EXPECT_NEAR(g.point(1000), 0.0, 1e-15);
}

TEST(Grid, RejectsDegenerateInput) {
  EXPECT_THROW(make_grid(0.0, 0.0, 5), std::invalid_argument);
  EXPECT_THROW(make_grid(1.0, -1.0, 5), std::invalid_argument);
  EXPECT_THROW(make_grid(-1.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(make_grid(-std::numeric_limits<double>::infinity(), 1.0, 5), std::invalid_argument);
  EXPECT_THROW(make_grid(0.0, std::numeric_limits<double>::quiet_NaN(), 5), std::invalid_argument);
}

TEST(Grid, TrapezoidWeights) {
  const auto g = make_grid(0.0, 4.0, 5);
  const auto w = g.weights();
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[2], 1.0);
  EXPECT_DOUBLE_EQ(w[4], 0.5);
  EXPECT_DOUBLE_EQ(w.sum(), g.span());
}

TEST(Grid, SymmetricGridReflectsExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> half(0.1, 50.0);
  std::uniform_int_distribution<int> count(2, 3000);
  for (int trial = 0; trial < 200; ++trial) {
    const double l = half(rng);
    const auto g = make_grid(-l, l, count(rng));
    ASSERT_TRUE(g.is_symmetric());
    for (Index j = 0; j < g.size(); ++j) {
      ASSERT_EQ(g.point(g.size() - 1 - j), -g.point(j)) << "n=" << g.size() << " j=" << j;
    }
  }
}

TEST(MomentumGrid, TwoPoints) {
  const auto p = conjugate_grid(make_grid(0.0, 1.0, 2));
  EXPECT_DOUBLE_EQ(p.point(0), -std::numbers::pi);
  EXPECT_DOUBLE_EQ(p.point(1), 0.0);
}

TEST(MomentumGrid, Spacing) {
  const auto p = conjugate_grid(make_grid(0.0, 1.5, 4));
  EXPECT_DOUBLE_EQ(p.spacing(), std::numbers::pi);
}

TEST(MomentumGrid, EightPointEnumeration) {
  // Enumerated: -pi/dx + j 2pi/(n dx) with dx = 1, n = 8.
  const double expected[8] = {-3.141592653589793, -2.356194490192345, -1.5707963267948966, -0.7853981633974483,
                              0.0,                0.7853981633974483, 1.5707963267948966,  2.356194490192345};
  const auto p = conjugate_grid(make_grid(-3.5, 3.5, 8));
  for (Index j = 0; j < 8; ++j) EXPECT_NEAR(p.point(j), expected[j], 1e-15);
  for (Index j = 1; j < 8; ++j) EXPECT_EQ(p.point(p.mirror(j)), -p.point(j));
  EXPECT_EQ(p.mirror(0), -1);
}

TEST(MomentumGrid, SpanInvariant) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> bound(-40.0, 40.0);
  std::uniform_int_distribution<int> count(2, 4096);
  for (int trial = 0; trial < 500; ++trial) {
    double a = bound(rng), b = bound(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const auto g = make_grid(a, b, count(rng));
    const auto p = conjugate_grid(g);
    const double product = p.spacing() * g.spacing() * static_cast<double>(g.size());
    ASSERT_NEAR(product, 2 * std::numbers::pi, 1e-12);
    ASSERT_NEAR(p.point(0), -std::numbers::pi / g.spacing(), 1e-9 * p.span());
  }
}

TEST(Grid, LongDoubleInstantiation) {
  const auto g = make_grid(-1.0L, 1.0L, 5);
  EXPECT_EQ(g.point(4), 1.0L);
  EXPECT_NEAR(double(conjugate_grid(g).spacing() * g.spacing() * 5), 2 * std::numbers::pi, 1e-15);
}

TEST(Grid, RecommendedHalfWidth) {
  EXPECT_DOUBLE_EQ(recommended_half_width(1.0, 0.5), 8.0);
  EXPECT_DOUBLE_EQ(recommended_half_width(0.5, 2.0), 16.0);
}
