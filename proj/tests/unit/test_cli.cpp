#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cellcycle/commands.hpp"

using namespace cellcycle;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("cellcycle_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Config, ParsesCommentsAndRejectsDuplicates) {
  auto c = Config::parse("a.b = 1  # note\n\n# whole line\nc = x,y\n");
  EXPECT_EQ(c.num("a.b"), 1.0);
  EXPECT_EQ(c.str("c"), "x,y");
  EXPECT_THROW(Config::parse("k=1\nk=2\n"), ConfigError);
  EXPECT_THROW(Config::parse("novalue\n"), ConfigError);
  EXPECT_THROW(c.num("c"), ConfigError);
  EXPECT_THROW(c.str("missing"), ConfigError);
}

TEST(Config, PresetKeysAreOverridable) {
  auto c = Config::parse("preset = exp_target\ncycle.eps = 0.2\n");
  EXPECT_EQ(c.num("cycle.eps"), 0.2);
  EXPECT_EQ(c.str("growth.kind"), "exponential");
  EXPECT_THROW(Config::parse("preset = nope\n"), ConfigError);
}

TEST(Config, ListsAndMatrices) {
  auto c = Config::parse("l = 1, 2,3\nm = 1,2; 3,4\n");
  EXPECT_EQ(c.list("l"), (std::vector<double>{1, 2, 3}));
  auto m = c.matrix("m");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[1][0], 3.0);
}

TEST(Config, HashIgnoresKeyOrderButNotValues) {
  auto a = Config::parse("x=1\ny=2\n"), b = Config::parse("y=2\nx=1\n"), c = Config::parse("x=1\ny=3\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Config, UnreadKeysAreReported) {
  auto c = Config::parse("used=1\ntypo=2\n");
  c.num("used");
  EXPECT_EQ(c.unused(), (std::vector<std::string>{"typo"}));
}

TEST(Commands, ValidateExitCodes) {
  TempDir d("validate");
  CliOptions o;
  o.out = d.path.string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(preset_config("affine_target"), o, out, err), 0);
  EXPECT_EQ(cmd_validate(preset_config("exp_target"), o, out, err), 0);
  EXPECT_NE(err.str().find("A7"), std::string::npos);
  auto bad = preset_config("crescentus");
  bad.set("hetero.beta", "1.2,0.44;1.2,0.44");
  EXPECT_EQ(cmd_validate(bad, o, out, err), 1);
  auto a3 = preset_config("affine_target");
  a3.set("growth.kappa", "0.2");
  a3.set("cycle.eps", "0.8");
  EXPECT_EQ(cmd_validate(a3, o, out, err), 2);
  auto typo = preset_config("affine_target");
  typo.set("growth.kind", "logistic");
  EXPECT_EQ(cmd_validate(typo, o, out, err), 1);
  std::string csv = slurp(d.path / "validate.csv");
  EXPECT_EQ(csv.rfind("# config_hash=", 0), 0u);
}

TEST(Commands, SpectralWritesHashedOutputs) {
  TempDir d("spectral");
  CliOptions o;
  o.out = d.path.string();
  o.grid = 64;
  std::ostringstream out, err;
  auto c = preset_config("exp_target");
  c.set("grid.levels", "128");
  ASSERT_EQ(cmd_spectral(c, o, out, err), 0) << err.str();
  std::string lam = slurp(d.path / "lambda.txt");
  EXPECT_NE(lam.find("# config_hash=" + c.hash()), std::string::npos);
  double l = std::stod(lam.substr(lam.find("lambda=") + 7));
  EXPECT_NEAR(l, 1.0, 1e-6);
  EXPECT_NE(slurp(d.path / "spectral.csv").find("x_b,f_tilde,v_tilde"), std::string::npos);
  EXPECT_NE(slurp(d.path / "eig2d.csv").find("x_b,a,f_i,v"), std::string::npos);
  EXPECT_EQ(cmd_spectral(preset_config("crescentus"), o, out, err), 1);
}

TEST(Commands, EvolveAndAbmRun) {
  TempDir d("evolve");
  CliOptions o;
  o.out = d.path.string();
  o.grid = 64;
  std::ostringstream out, err;
  auto c = preset_config("affine_target");
  c.set("grid.levels", "128");
  c.set("horizon.cycles", "2");
  c.set("evolve.init", "bump");
  c.set("evolve.snapshots", "0.5");
  c.set("chemostat.D", "lambda");
  ASSERT_EQ(cmd_evolve(c, o, out, err), 0) << err.str();
  EXPECT_TRUE(fs::exists(d.path / "z_t0.csv"));
  EXPECT_TRUE(fs::exists(d.path / "w_t1.csv"));
  EXPECT_NE(slurp(d.path / "evolve.csv").find("chemostat_population"), std::string::npos);
  auto dirac = preset_config("affine_target");
  dirac.set("evolve.init", "dirac");
  EXPECT_EQ(cmd_evolve(dirac, o, out, err), 1);

  CliOptions a = o;
  a.cells = 2000;
  a.seed = 3;
  auto ab = preset_config("paradox_linear");
  ab.set("abm.cycles", "12");
  ASSERT_EQ(cmd_abm(ab, a, out, err), 0) << err.str();
  EXPECT_NE(out.str().find("lambda_hat"), std::string::npos);
  EXPECT_NE(out.str().find("generations alive"), std::string::npos);
  EXPECT_TRUE(fs::exists(d.path / "census_t0.csv"));
}
