#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cellcycle/growth.hpp"

using namespace cellcycle;

TEST(Growth, ExponentialClosedForm) {
  auto law = GrowthLaw::exponential(0.7, 0.5, 1.5);
  for (double a : {0.0, 0.2, 0.9}) EXPECT_NEAR(law.flow(0.8, a), 0.8 * std::exp(0.7 * a), 1e-14);
  EXPECT_NEAR(law.time(1.3), std::log(1.3 / 0.5) / 0.7, 1e-14);
  EXPECT_NEAR(law.time_between(0.6, 1.2), std::log(2.0) / 0.7, 1e-14);
}

TEST(Growth, AffineClosedForm) {
  auto law = GrowthLaw::affine(0.2, 1.0, 0.5, 1.5);
  double c = 1.0 / 0.2;
  for (double a : {0.1, 0.5, 1.0}) EXPECT_NEAR(law.flow(0.7, a), (0.7 + c) * std::exp(0.2 * a) - c, 1e-13);
  auto lin = GrowthLaw::affine(0.0, 2.0, 0.5, 1.5);
  EXPECT_NEAR(lin.flow(0.7, 0.5), 1.7, 1e-14);
}

TEST(Growth, TabulatedLinearTableMatchesAffine) {
  std::vector<double> xs, gs;
  for (int k = 0; k <= 40; ++k) {
    xs.push_back(0.5 + 2.5 * k / 40.0);
    gs.push_back(xs.back() + 0.3);
  }
  auto tab = GrowthLaw::tabulated(xs, gs, 0.5, 1.5);
  auto ref = GrowthLaw::affine(1.0, 0.3, 0.5, 1.5);
  for (double x : {0.5, 0.9, 1.4})
    for (double a : {0.1, 0.4}) EXPECT_NEAR(tab.flow(x, a), ref.flow(x, a), 1e-9);
  EXPECT_NEAR(tab.time(2.5), ref.time(2.5), 1e-12);
}

TEST(Growth, FlowIsAGroup) {
  std::vector<double> xs, gs;
  for (int k = 0; k <= 64; ++k) {
    xs.push_back(0.5 + 2.5 * k / 64.0);
    gs.push_back(xs.back() + 0.3 + 0.1 * std::sin(3 * xs.back()));
  }
  auto law = GrowthLaw::tabulated(xs, gs, 0.5, 1.5);
  double x = 0.8;
  EXPECT_NEAR(law.flow(law.flow(x, 0.3), 0.4), law.flow(x, 0.7), 1e-10);
  EXPECT_NEAR(law.flow(law.flow(x, 0.5), -0.5), x, 1e-10);
}

TEST(Growth, DyadicLawIsHomogeneous) {
  auto law = GrowthLaw::dyadic(GrowthSeed::log_periodic(1.0, 0.1, 0.5), 0.5, 1.5);
  for (double x = 0.5; x <= 1.5; x += 0.05) EXPECT_NEAR(law.g(2 * x), 2 * law.g(x), 1e-12 * law.g(2 * x));
  // equal doubling time from every size
  for (double x : {0.5, 0.77, 1.1, 1.5}) EXPECT_NEAR(law.time(2 * x) - law.time(x), law.octave_time(), 1e-9);
}

TEST(Growth, RejectsBadInput) {
  EXPECT_THROW(GrowthLaw::exponential(0.0, 0.5, 1.5), NonPositiveG);
  EXPECT_THROW(GrowthLaw::affine(-1.0, 1.0, 0.5, 1.5), NonPositiveG);
  EXPECT_THROW(GrowthLaw::tabulated({0.5, 3.0}, {1.0, -1.0}, 0.5, 1.5), NonPositiveG);
  EXPECT_THROW(GrowthLaw::tabulated({0.5, 2.0}, {1.0, 1.0}, 0.5, 1.5), InvalidInput);
  GrowthSeed bad = GrowthSeed::log_periodic(1.0, 0.1, 0.5);
  bad.g = [](double x) { return x + 1.0; };
  EXPECT_THROW(GrowthLaw::dyadic(bad, 0.5, 1.5), SeedMismatch);
}

TEST(Growth, LeavingTheDomainThrows) {
  auto law = GrowthLaw::exponential(1.0, 0.5, 1.5);
  EXPECT_THROW(law.flow(1.5, 1.0), DomainExit);
  EXPECT_FALSE(law.try_flow(1.5, 1.0).has_value());
  EXPECT_THROW(law.g(3.5), DomainExit);
}

TEST(Growth, DaughterSizeHalvesTheMother) {
  auto law = GrowthLaw::exponential(1.0, 0.5, 1.5);
  EXPECT_NEAR(daughter_size(law, 0.8, std::log(2.0)), 0.8, 1e-14);
  EXPECT_NEAR(cycle_age(law, 0.8, 0.8), std::log(2.0), 1e-14);
}
