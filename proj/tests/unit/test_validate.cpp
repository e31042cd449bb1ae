#include <gtest/gtest.h>

#include "cellcycle/hetero.hpp"
#include "cellcycle/validate.hpp"
#include "fixtures.hpp"

using namespace cellcycle;

TEST(Validate, AffinePresetPassesEverything) {
  auto s = fixtures::preset("affine_target");
  auto rep = validate_assumptions(s.law, s.model);
  EXPECT_TRUE(rep.core_ok()) << rep.text();
  EXPECT_TRUE(rep.aeg_ok()) << rep.text();
}

TEST(Validate, ExponentialGrowthFailsOnlyA7) {
  auto s = fixtures::exp_target();
  auto rep = validate_assumptions(s.law, s.model);
  EXPECT_TRUE(rep.core_ok()) << rep.text();
  EXPECT_FALSE(rep.aeg_ok());
}

TEST(Validate, TargetWindowFromTheTargetFormulaPassesA5A6) {
  auto c = preset_config("exp_target");
  c.set("cycle.alpha", "0.5");
  auto s = build_scenario(c);
  EXPECT_NEAR(s.model.x_lo(), std::exp(-0.25 / 0.5), 1e-12);
  EXPECT_NEAR(s.model.x_hi(), std::exp(0.25 / 0.5), 1e-12);
  auto rep = validate_assumptions(s.law, s.model);
  ASSERT_NE(rep.find("A5"), nullptr);
  EXPECT_EQ(rep.find("A5")->status, Status::pass) << rep.text();
  EXPECT_EQ(rep.find("A6")->status, Status::pass) << rep.text();
}

TEST(Validate, NegativeShortestCycleFailsA3) {
  // affine growth with a long delay window: the shortest cycle from the largest cell is negative
  auto c = preset_config("affine_target");
  c.set("growth.kappa", "0.2");
  c.set("cycle.eps", "0.8");
  auto s = build_scenario(c);
  auto rep = validate_assumptions(s.law, s.model);
  EXPECT_FALSE(rep.core_ok());
  EXPECT_THROW(require_core_assumptions(s.law, s.model), AssumptionViolation);
}

TEST(Validate, WindowTooWideForTheCycleFailsA5) {
  auto c = preset_config("constant_delta");
  c.set("window.hi", "4");
  auto s = build_scenario(c);
  auto rep = validate_assumptions(s.law, s.model);
  EXPECT_FALSE(rep.core_ok()) << rep.text();
}

TEST(Hetero, RuleInvariants) {
  auto law = GrowthLaw::exponential(1.0, 0.5, 2.0);
  auto m = CycleModel::constant_delta(1.0, Density1D::uniform(1, 2), 1, 2);
  EXPECT_THROW(HeteroDivisionRule({{0.5, 0.6}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}, {law, law}, {m, m}),
               InvalidInput);
  EXPECT_THROW(HeteroDivisionRule({{0.5, 0.5}, {0.5, 0.5}}, {{1.2, 0.5}, {0.5, 0.5}}, {law, law}, {m, m}),
               InvalidInput);
  HeteroDivisionRule ok({{0.5, 0.5}, {0.5, 0.5}}, {{0.56, 0.44}, {0.56, 0.44}}, {law, law}, {m, m});
  // exponential growth: factor r / beta * g(y) / g(s) = r / beta * y / s
  auto tp = hetero_transfer(ok, 0, 1, 0.6, 0.3);
  ASSERT_TRUE(tp.valid);
  double s = 0.6 / 0.44;
  EXPECT_NEAR(tp.source, s * std::exp(-0.3), 1e-12);
  EXPECT_NEAR(tp.factor, 0.5 / 0.44 * std::exp(-0.3), 1e-12);
}

TEST(Hetero, CrescentusPresetValidates) {
  auto s = fixtures::preset("crescentus");
  ASSERT_TRUE(s.is_hetero());
  auto rep = validate_hetero(*s.hetero);
  EXPECT_TRUE(rep.core_ok()) << rep.text();
  EXPECT_NE(rep.find("A5_hetero"), nullptr);
  EXPECT_NE(rep.find("A1[1]"), nullptr);
}

TEST(Hetero, MismatchedDaughterWindowsFailA5) {
  auto s = fixtures::preset("crescentus");
  const auto& r = *s.hetero;
  // swap the daughter fractions: stalked daughters fall into the swarmer window and back
  HeteroDivisionRule bad({{0.5, 0.5}, {0.5, 0.5}}, {{0.44, 0.56}, {0.44, 0.56}}, {r.law(0), r.law(1)},
                         {r.model(0), r.model(1)});
  EXPECT_FALSE(validate_hetero(bad).core_ok());
}
