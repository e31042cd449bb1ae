#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "cellcycle/density.hpp"
#include "cellcycle/numeric.hpp"

using namespace cellcycle;

TEST(Quadrature, GaussRuleIsExactForDegree2nMinus1) {
  const GaussRule& r = gauss_legendre(8);
  double s = 0.0;
  for (int k = 0; k < 8; ++k) s += r.w[k] * std::pow(0.5 * (r.x[k] + 1.0), 15) * 0.5;
  EXPECT_NEAR(s, 1.0 / 16.0, 1e-15);
}

TEST(Quadrature, CompositeIntegralOfExp) {
  EXPECT_NEAR(integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 4, 16), std::exp(1.0) - 1.0, 1e-14);
  EXPECT_EQ(integrate([](double) { return 1.0; }, 1.0, 1.0), 0.0);
}

TEST(Pchip, ReproducesLinearDataAndStaysMonotone) {
  Pchip lin({0, 1, 2, 4}, {1, 3, 5, 9});
  for (double t : {0.0, 0.3, 1.7, 3.9}) EXPECT_NEAR(lin(t), 1 + 2 * t, 1e-14);
  Pchip step({0, 1, 2, 3}, {0, 0, 1, 1});
  for (double t = 0; t <= 3; t += 0.01) {
    EXPECT_GE(step(t), -1e-15);
    EXPECT_LE(step(t), 1 + 1e-15);
  }
}

TEST(Stream, CounterStreamsAreReproducibleAndIndependentOfOrder) {
  Stream a(7, 3), b(7, 3), c(7, 4);
  for (int k = 0; k < 10; ++k) {
    double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
  }
}

TEST(Stream, UniformAndNormalMoments) {
  Stream s(11);
  const int n = 200000;
  double m = 0, z = 0, z2 = 0;
  for (int k = 0; k < n; ++k) {
    double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    m += u;
    double g = s.normal();
    z += g;
    z2 += g * g;
  }
  EXPECT_NEAR(m / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(z / n, 0.0, 5 / std::sqrt(double(n)));
  EXPECT_NEAR(z2 / n, 1.0, 5 * std::sqrt(2.0 / n));
}

TEST(ParallelFor, EachIndexExactlyOnce) {
  for (int t : {1, 2, 3, 8, 64}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), t, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) hits[i]++;
    });
    for (auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
}

TEST(Density, NormalizedAndInvertible) {
  for (const auto& d : {Density1D::uniform(1, 2), Density1D::beta(-0.5, 0.5, 2.0),
                        Density1D::truncated_normal(-1, 1, 0, 0.4)}) {
    EXPECT_NEAR(integrate([&](double x) { return d.pdf(x); }, d.lo(), d.hi(), 16, 16), 1.0, 1e-10);
    for (double u : {0.01, 0.3, 0.5, 0.9}) EXPECT_NEAR(d.cdf(d.quantile(u)), u, 1e-10);
  }
  // symmetric about the centre
  EXPECT_NEAR(Density1D::beta(-1, 1, 2).mean(), 0.0, 1e-12);
  EXPECT_NEAR(Density1D::truncated_normal(-1, 1, 0, 0.3).mean(), 0.0, 1e-12);
  EXPECT_NEAR(Density1D::uniform(1, 2).cdf(1.5), 0.5, 1e-15);
}
