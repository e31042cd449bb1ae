// Acceptance checks 1-9: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cellcycle/commands.hpp"

using namespace cellcycle;
namespace fs = std::filesystem;

namespace {

// Tolerances, pinned.
constexpr double kRadiusTol = 1e-6;        // r(K_0) = 2
constexpr double kHalfBoundTol = 1e-6;     // r(K_{ln4/a_lo}) <= 1/2
constexpr double kMalthusTol = 1e-6;       // lambda = kappa, v ~ x
constexpr double kAdjointTol = 1e-8;       // duality gap and unit radii
constexpr double kDriftTol = 1e-3;         // eigenflow drift, conservation
constexpr double kAegTol = 1e-3;           // d(t) with A7
constexpr double kNoAegFloor = 0.05;       // d(t) without A7
constexpr double kSeMultiple = 3.0;        // ABM agreement in standard errors
constexpr double kKsTol = 0.03;            // birth-size histogram
constexpr double kNormTol = 1e-8;          // constant-Delta normalization
constexpr std::size_t kAgents = 1000000;   // ABM population cap
constexpr long kGenerationCap = 3;         // living generations under g = x

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int threads = 8;
fs::path scratch = "acceptance_out";

std::shared_ptr<const SpectralSolution> spectral(const Scenario& s, int nodes = 256, std::size_t levels = 512) {
  return std::make_shared<const SpectralSolution>(solve_spectral(s.law, s.model, nodes, levels, threads));
}

Table2D eigen_u0(const SpectralSolution& sp, const TransportSetup& setup) {
  auto u = tabulate(sp.grid, sp.ages, [](double, double) { return 0.0; });
  for (std::size_t i = 0; i < sp.grid.size(); ++i)
    for (std::size_t k = 0; k < sp.ages.inside[i]; ++k) u(i, k) = setup.phi()(i, k) * sp.f_full(i, k);
  return u;
}

Table2D bump_u0(const SpectralSolution& sp, const CycleModel& m, double centre, double age) {
  return tabulate(sp.grid, sp.ages, [&](double x, double a) {
    double c = (x - m.x_lo()) / (m.x_hi() - m.x_lo()) - centre;
    return m.phi(x, a) * std::exp(-200 * c * c) * std::exp(-40 * (a - age) * (a - age));
  });
}

void criterion1(Outcome& o) {
  for (const auto& [name, text] : presets()) {
    auto s = build_scenario(preset_config(name));
    if (s.is_hetero()) {
      o.detail << " " << name << ": multi-type, no single renewal operator;";
      continue;
    }
    if (!validate_assumptions(s.law, s.model).core_ok()) {
      o.detail << " " << name << ": A1-A6 fail, skipped;";
      continue;
    }
    auto t0 = Clock::now();
    RenewalKernels rk(s.law, s.model, QuadratureGrid::with_size(s.model.x_lo(), s.model.x_hi(), 256), threads);
    double r0 = spectral_radius(rk.K(0.0)).radius;
    double rb = spectral_radius(rk.K(std::log(4.0) / rk.a_lo_min())).radius;
    double dt = seconds_since(t0);
    o.detail << " " << name << ": |r0-2|=" << std::abs(r0 - 2) << " r(K_b)=" << rb << " t=" << dt << "s;";
    o.check(std::abs(r0 - 2) < kRadiusTol, name + " r(K_0)");
    o.check(rb <= 0.5 + kHalfBoundTol, name + " r(K_b)");
    o.check(dt < 5.0, name + " runtime");
  }
}

void criterion2(Outcome& o) {
  auto t0 = Clock::now();
  auto s = build_scenario(preset_config("exp_target"));
  auto sp = solve_spectral(s.law, s.model, 256, 512, threads);
  double r0 = sp.v_tilde[0] / sp.grid.nodes()[0], worst = 0;
  for (std::size_t i = 0; i < sp.grid.size(); ++i)
    worst = std::max(worst, std::abs(sp.v_tilde[i] / sp.grid.nodes()[i] / r0 - 1));
  double dt = seconds_since(t0);
  o.detail << " |lambda-1|=" << std::abs(sp.lambda - 1) << " max|v/x/c-1|=" << worst << " t=" << dt << "s";
  o.check(std::abs(sp.lambda - 1) < kMalthusTol, "lambda");
  o.check(worst < kMalthusTol, "v proportional to x");
  o.check(dt < 10.0, "runtime");
}

void criterion3(Outcome& o) {
  for (const char* name : {"affine_target", "tabulated_target", "exp_target"}) {
    auto s = build_scenario(preset_config(name));
    auto sp = solve_spectral(s.law, s.model, 256, 512, threads);  // 100 random pairs inside
    o.detail << " " << name << ": gap=" << sp.adjoint_gap << " |r(K)-1|=" << sp.r_K << " |r(J)-1|=" << sp.r_J
             << ";";
    o.check(sp.adjoint_gap < kAdjointTol, std::string(name) + " gap");
    o.check(sp.r_K < kAdjointTol && sp.r_J < kAdjointTol, std::string(name) + " radii");
  }
}

void criterion4(Outcome& o) {
  for (const char* name : {"affine_target", "tabulated_target"}) {
    auto t0 = Clock::now();
    auto s = build_scenario(preset_config(name));
    auto sp = spectral(s);
    auto setup = TransportSetup::from_spectral(s.law, s.model, sp, threads);
    auto st = init_state(eigen_u0(*sp, *setup), setup);
    double horizon = default_horizon(s.model, 20);
    auto rep = evolve(st, horizon, *sp, {64, {}});
    double drift = 0;
    for (double d : rep.eigen_drift) drift = std::max(drift, d);
    auto st2 = init_state(bump_u0(*sp, s.model, 0.3, 0.2), setup);
    auto rep2 = evolve(st2, horizon, *sp, {64, {}});
    double cons = 0;
    for (double c : rep2.conserved) cons = std::max(cons, std::abs(c / rep2.c0 - 1));
    double dt = seconds_since(t0);
    o.detail << " " << name << ": drift=" << drift << " |C/C0-1|=" << cons << " t=" << dt << "s;";
    o.check(drift < kDriftTol, std::string(name) + " drift");
    o.check(cons < kDriftTol, std::string(name) + " conservation");
    o.check(dt < 120.0, std::string(name) + " runtime");
  }
}

void criterion5(Outcome& o) {
  {
    auto s = build_scenario(preset_config("affine_target"));
    auto rep = validate_assumptions(s.law, s.model);
    o.check(rep.aeg_ok(), "affine preset A7");
    auto sp = spectral(s);
    auto setup = TransportSetup::from_spectral(s.law, s.model, sp, threads);
    double horizon = default_horizon(s.model, 20);
    for (double c : {0.2, 0.5, 0.8}) {
      auto st = init_state(bump_u0(*sp, s.model, c, 0.1), setup);
      auto r = evolve(st, horizon, *sp, {64, {}});
      o.detail << " affine z0@" << c << ": d(0)=" << r.aeg_l1.front() << " d(T)=" << r.aeg_l1.back() << ";";
      o.check(r.aeg_l1.back() < kAegTol, "affine d(T) for centre " + std::to_string(c));
    }
  }
  auto s = build_scenario(preset_config("dyadic_paradox"));
  o.check(!validate_assumptions(s.law, s.model).aeg_ok(), "paradox law should fail A7");
  auto sp = spectral(s);
  auto setup = TransportSetup::from_spectral(s.law, s.model, sp, threads);
  auto st = init_state(bump_u0(*sp, s.model, 0.5, 0.1), setup);
  auto r = evolve(st, default_horizon(s.model, 20), *sp, {64, {}});
  double lowest = INFINITY;
  for (double d : r.aeg_l1) lowest = std::min(lowest, d);
  o.detail << " paradox min d(t)=" << lowest;
  o.check(lowest > kNoAegFloor, "paradox d(t) floor");
}

void criterion6(Outcome& o) {
  for (const char* name : {"affine_target", "tabulated_target"}) {
    auto t0 = Clock::now();
    auto s = build_scenario(preset_config(name));
    auto sp = spectral(s);
    AbmModel m(s.law, s.model);
    auto pop = seed_population(m, 100000, Density1D::uniform(s.model.x_lo(), s.model.x_hi()), 20240 + name[0]);
    RunOptions ro;
    ro.n_max = kAgents;
    double t_end = 30 * m.mean_cycle();
    ro.births_from = t_end - 2 * m.mean_cycle();
    auto tr = run(pop, m, t_end, ro);
    auto e = estimate_malthus(tr);
    ProfileCdf cdf(sp->grid, sp->f_tilde);
    double ks = ks_distance(tr.birth_x, tr.birth_w, [&](double x) { return cdf(x); });
    double dt = seconds_since(t0);
    double z = (e.lambda_hat - sp->lambda) / e.stderr;
    o.detail << " " << name << ": lambda=" << sp->lambda << " hat=" << e.lambda_hat << " se=" << e.stderr
             << " z=" << z << " KS=" << ks << " t=" << dt << "s;";
    o.check(std::abs(z) <= kSeMultiple, std::string(name) + " lambda within 3 SE");
    o.check(ks < kKsTol, std::string(name) + " KS");
    o.check(dt < 180.0, std::string(name) + " runtime");
  }
}

void criterion7(Outcome& o) {
  auto s = build_scenario(preset_config("paradox_linear"));
  o.check(s.model.x_hi() / s.model.x_lo() < 2.0, "window ratio below 2");
  AbmModel m(s.law, s.model);
  RunOptions ro;
  ro.track_sizes = true;
  const double P = m.mean_cycle();
  for (int k = 1; k <= 40; ++k) ro.census_times.push_back(0.5 * k * P);
  auto one = seed_dirac(m, 1.0, 77);
  auto tr = run(one, m, 20 * P, ro);
  long worst = 0, bound = 0;
  bool equal = true;
  for (const auto& c : tr.censuses) {
    auto pc = paradox_census(c, s.law);
    worst = std::max(worst, pc.generations_alive);
    bound = pc.bound;
    equal = equal && pc.distinct_sizes == pc.generations_alive;
  }
  for (std::size_t k = 0; k < tr.t.size(); ++k) equal = equal && tr.distinct_sizes[k] == tr.generations[k];
  auto two = seed_sizes(m, {0.9, 1.15}, {0, 1}, 78);
  auto tr2 = run(two, m, 20 * P, ro);
  bool disjoint = true;
  for (const auto& c : tr2.censuses) disjoint = disjoint && paradox_census(c, s.law).tags_disjoint;
  o.detail << " censuses=" << tr.censuses.size() << " cells=" << one.cells.size() << " max generations=" << worst
           << " (window bound " << bound << ") sizes=generations:" << (equal ? "yes" : "no")
           << " tagged disjoint:" << (disjoint ? "yes" : "no");
  o.check(worst <= kGenerationCap, "generations");
  o.check(equal, "distinct sizes equal generations");
  o.check(disjoint, "disjoint subpopulations");
}

void criterion8(Outcome& o) {
  {
    auto s = build_scenario(preset_config("constant_delta"));
    double worst = 0;
    for (int k = 0; k <= 64; ++k) {
      double x = s.model.x_lo() + (s.model.x_hi() - s.model.x_lo()) * k / 64;
      double mass = integrate([&](double a) { return s.model.q(x, a); }, s.model.a_lo(x), s.model.a_hi(x), 16, 32);
      worst = std::max(worst, std::abs(mass - 1));
    }
    o.detail << " constant-Delta max|int q - 1|=" << worst << ";";
    o.check(worst < kNormTol, "constant-Delta normalization");
    o.check(validate_assumptions(s.law, s.model).core_ok(), "constant-Delta A1-A6");
  }
  for (double alpha : {1.0, 0.5}) {
    auto c = preset_config("exp_target");
    c.set("cycle.alpha", fmt17(alpha));
    auto s = build_scenario(c);
    double k = s.law.kappa(), eps = c.num("cycle.eps");
    bool window = std::abs(s.model.x_lo() - std::exp(-k * eps / alpha)) < 1e-12 &&
                  std::abs(s.model.x_hi() - std::exp(k * eps / alpha)) < 1e-12;
    auto rep = validate_assumptions(s.law, s.model);
    bool a56 = rep.find("A5")->status == Status::pass && rep.find("A6")->status == Status::pass;
    o.detail << " target alpha=" << alpha << " window formula:" << (window ? "yes" : "no")
             << " A5/A6:" << (a56 ? "pass" : "fail") << ";";
    o.check(window && a56, "target window alpha=" + fmt17(alpha));
  }
  auto s = build_scenario(preset_config("crescentus"));
  o.check(validate_hetero(*s.hetero).core_ok(), "crescentus validation");
  AbmModel m(*s.hetero);
  auto pop = seed_population(m, 20000, Density1D::uniform(1, 2), 4242, 0);
  RunOptions ro;
  ro.n_max = 200000;
  auto tr = run(pop, m, 30 * m.mean_cycle(), ro);
  auto e0 = estimate_malthus(tr, 10, 0), e1 = estimate_malthus(tr, 10, 1);
  double se = std::hypot(e0.stderr, e1.stderr);
  o.detail << " crescentus stalked=" << e0.lambda_hat << "+-" << e0.stderr << " swarmer=" << e1.lambda_hat << "+-"
           << e1.stderr << " |diff|/se=" << std::abs(e0.lambda_hat - e1.lambda_hat) / se;
  o.check(std::abs(e0.lambda_hat - e1.lambda_hat) <= kSeMultiple * se, "crescentus common rate");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion9(Outcome& o) {
  using Cmd = int (*)(const Config&, const CliOptions&, std::ostream&, std::ostream&);
  struct Job {
    const char* name;
    Cmd cmd;
    const char* preset;
  };
  const Job jobs[] = {{"validate", cmd_validate, "affine_target"},
                      {"spectral", cmd_spectral, "tabulated_target"},
                      {"evolve", cmd_evolve, "affine_target"},
                      {"abm", cmd_abm, "affine_target"},
                      {"abm_hetero", cmd_abm, "crescentus"}};
  for (const auto& j : jobs) {
    Config c = preset_config(j.preset);
    c.set("horizon.cycles", "5");
    c.set("evolve.snapshots", "1");
    c.set("abm.cycles", "12");
    c.set("abm.compare", "false");
    std::vector<std::string> images;
    for (int t : {1, 8}) {
      CliOptions opt;
      opt.out = (scratch / ("det_" + std::string(j.name) + "_t" + std::to_string(t))).string();
      fs::remove_all(opt.out);
      opt.threads = t;
      opt.cells = 50000;
      opt.seed = 99;
      std::ostringstream out, err;
      int rc = j.cmd(c, opt, out, err);
      o.check(rc == 0, std::string(j.name) + " exit " + std::to_string(rc));
      std::string all;
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(opt.out)) files.push_back(f.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) all += f.filename().string() + "\n" + slurp(f);
      images.push_back(all);
    }
    bool same = images[0] == images[1] && !images[0].empty();
    o.detail << " " << j.name << ":" << (same ? "identical" : "DIFFERENT") << " (" << images[0].size() << " bytes);";
    o.check(same, std::string(j.name) + " byte identity");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string dir = scratch.string();
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--scratch", dir, "scratch directory");
  std::vector<int> only;
  app.add_option("--only", only, "run these criteria only");
  CLI11_PARSE(app, argc, argv);
  scratch = dir;
  fs::create_directories(scratch);

  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> all = {
      {"spectral sanity", criterion1},     {"Malthusian identity", criterion2}, {"adjoint duality", criterion3},
      {"eigenflow", criterion4},           {"AEG convergence", criterion5},     {"ABM-PDE agreement", criterion6},
      {"paradox bound", criterion7},       {"model presets", criterion8},       {"determinism", criterion9}};
  bool ok = true;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!only.empty() && std::find(only.begin(), only.end(), int(k + 1)) == only.end()) continue;
    Outcome o;
    auto t0 = Clock::now();
    try {
      all[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s criterion %zu (%s):%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, all[k].first,
                o.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
