#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cellcycle/cycle.hpp"
#include "fixtures.hpp"

using namespace cellcycle;

namespace {
double mass(const CycleModel& m, double x) {
  return integrate([&](double a) { return m.q(x, a); }, m.a_lo(x), m.a_hi(x), 16, 32);
}
}  // namespace

TEST(ConstantDelta, DensityFormulaAndNormalization) {
  const double k = 0.8;
  auto h = Density1D::beta(1.0, 2.0, 2.0);
  auto m = CycleModel::constant_delta(k, h, 1.0, 2.0);
  for (double x : {1.0, 1.3, 2.0}) {
    EXPECT_NEAR(mass(m, x), 1.0, 1e-8);
    EXPECT_NEAR(m.a_lo(x), std::log(1 + 1.0 / x) / k, 1e-12);
    EXPECT_NEAR(m.a_hi(x), std::log(1 + 2.0 / x) / k, 1e-12);
    double a = 0.5 * (m.a_lo(x) + m.a_hi(x));
    EXPECT_NEAR(m.q(x, a), k * x * std::exp(k * a) * h.pdf(x * (std::exp(k * a) - 1)), 1e-12);
  }
}

TEST(TargetSize, SupportIsTheShiftedDelayWindow) {
  auto s = fixtures::exp_target(0.25);
  const auto& m = s.model;
  EXPECT_NEAR(m.x_lo(), std::exp(-0.25), 1e-12);
  EXPECT_NEAR(m.x_hi(), std::exp(0.25), 1e-12);
  for (double x : {m.x_lo(), 1.0, m.x_hi()}) {
    EXPECT_NEAR(m.a_lo(x), std::log(2 / x) - 0.25, 1e-10);
    EXPECT_NEAR(m.a_hi(x), std::log(2 / x) + 0.25, 1e-10);
    EXPECT_NEAR(mass(m, x), 1.0, 1e-8);
  }
  // symmetric delay: mean cycle from x0 is the doubling time
  EXPECT_NEAR(m.mean_cycle(1.0), std::log(2.0), 1e-9);
}

TEST(Cycle, SurvivalHazardAndSampling) {
  auto s = fixtures::preset("affine_target");
  const auto& m = s.model;
  double x = 0.5 * (m.x_lo() + m.x_hi());
  for (double u : {0.05, 0.5, 0.95}) EXPECT_NEAR(m.cdf(x, m.sample_tau(x, u)), u, 1e-9);
  double a = 0.5 * (m.a_lo(x) + m.a_hi(x));
  EXPECT_NEAR(m.phi(x, a), 1 - m.cdf(x, a), 1e-15);
  EXPECT_NEAR(m.hazard(x, a), m.q(x, a) / m.phi(x, a), 1e-12);
  EXPECT_EQ(m.phi(x, 0.0), 1.0);
  EXPECT_NEAR(m.phi(x, m.a_hi(x)), 0.0, 1e-12);
}

TEST(Cycle, OutsideTheWindowThrows) {
  auto s = fixtures::exp_target();
  EXPECT_THROW(s.model.q(3.0, 0.5), OutOfWindow);
}

TEST(Tabulated, RowsAreRenormalized) {
  std::vector<double> xb{1.0, 2.0}, a{0.0, 0.5, 1.0, 1.5}, q{0, 2, 2, 0, 0, 1, 1, 0};
  auto m = CycleModel::tabulated(xb, a, q);
  EXPECT_NEAR(m.cdf(1.0, 1.5), 1.0, 1e-14);
  EXPECT_NEAR(m.cdf(2.0, 0.75), 0.5, 1e-14);
  EXPECT_THROW(CycleModel::tabulated(xb, a, {0, -1, 2, 0, 0, 1, 1, 0}), InvalidInput);
}

TEST(Delayed, ShiftsTheBaseCycle) {
  auto law = GrowthLaw::exponential(1.0, 0.5, 2.0);
  auto base = CycleModel::constant_delta(1.0, Density1D::uniform(1.0, 2.0), 1.0, 2.0);
  double rho = std::log(1.25);
  auto m = CycleModel::delayed(base, rho, law, 0.8, 1.6);
  double x = 1.0;
  double xr = x * std::exp(rho);
  EXPECT_NEAR(m.a_lo(x), rho + base.a_lo(xr), 1e-12);
  EXPECT_NEAR(m.q(x, rho + 0.5), base.q(xr, 0.5), 1e-12);
  EXPECT_NEAR(mass(m, x), 1.0, 1e-8);
}

TEST(Perron, PreservesMassAndRejectsBadAges) {
  auto s = fixtures::exp_target();
  GridFunction f;
  for (int k = 0; k <= 200; ++k) {
    double x = s.model.x_lo() + (s.model.x_hi() - s.model.x_lo()) * k / 200.0;
    f.x.push_back(x);
    double c = (x - 1.0) / 0.05;
    f.y.push_back(std::exp(-c * c));
  }
  double a = std::log(2.0);  // image is the same bump
  auto g = perron_apply(s.law, s.model, f, a);
  auto m = [](const GridFunction& h) {
    return integrate([&](double x) { return h(x); }, h.x.front(), h.x.back(), 64, 16);
  };
  EXPECT_NEAR(m(g), m(f), 1e-6);
  EXPECT_THROW(perron_apply(s.law, s.model, f, 0.1), BadAge);
  f.y[3] = -1;
  EXPECT_THROW(perron_apply(s.law, s.model, f, a), NegativeInput);
}
