#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "abm.hpp"
#include "config.hpp"
#include "cycle.hpp"
#include "density.hpp"
#include "growth.hpp"
#include "hetero.hpp"

namespace cellcycle {

// Everything a run needs, resolved from a Config.
struct Scenario {
  Config cfg;
  GrowthLaw law;
  CycleModel model;  // type 0 in a multi-type run
  std::optional<HeteroDivisionRule> hetero;
  int nodes = 256;
  int levels = 512;
  double horizon_cycles = 20.0;
  std::uint64_t seed = 1;

  bool is_hetero() const { return hetero.has_value(); }
};

namespace detail {

inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t cols,
                                                         const std::string& header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool seen_header = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      std::string compact;
      for (char c : line)
        if (c != ' ') compact += c;
      if (compact != header) throw ConfigError(path + ": expected header '" + header + "'");
      seen_header = true;
      continue;
    }
    std::vector<double> r;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      char* end = nullptr;
      double v = std::strtod(item.c_str(), &end);
      if (item.empty() || *end != '\0') throw ConfigError(path + ": bad number '" + item + "'");
      r.push_back(v);
    }
    if (r.size() != cols) throw ConfigError(path + ": expected " + std::to_string(cols) + " columns");
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");
  return rows;
}

// Density on [lo, hi] described by <prefix>.density and its shape keys.
inline Density1D density_from(const Config& c, const std::string& prefix, double lo, double hi,
                              const std::string& def) {
  std::string kind = c.str(prefix + ".density", def);
  if (kind == "uniform") return Density1D::uniform(lo, hi);
  if (kind == "beta") return Density1D::beta(lo, hi, c.num(prefix + ".shape", 2.0));
  if (kind == "truncated_normal")
    return Density1D::truncated_normal(lo, hi, c.num(prefix + ".mean", 0.5 * (lo + hi)),
                                       c.num(prefix + ".sigma", (hi - lo) / 5.0));
  throw ConfigError(prefix + ".density: unknown density '" + kind + "'");
}

inline GrowthLaw law_from(const Config& c, double lo, double hi) {
  std::string kind = c.str("growth.kind");
  if (kind == "exponential") return GrowthLaw::exponential(c.num("growth.kappa"), lo, hi);
  if (kind == "affine") return GrowthLaw::affine(c.num("growth.kappa"), c.num("growth.beta"), lo, hi);
  if (kind == "tabulated") {
    std::vector<double> xs, gs;
    if (c.has("growth.file")) {
      for (const auto& r : read_numeric_csv(c.str("growth.file"), 2, "x,g")) {
        xs.push_back(r[0]);
        gs.push_back(r[1]);
      }
    } else {
      xs = c.list("growth.x");
      gs = c.list("growth.g");
    }
    return GrowthLaw::tabulated(xs, gs, lo, hi);
  }
  if (kind == "dyadic") {
    std::string seed = c.str("growth.seed", "log_periodic");
    if (seed != "log_periodic") throw ConfigError("growth.seed: unknown seed '" + seed + "'");
    auto s = GrowthSeed::log_periodic(c.num("growth.seed.kappa", 1.0), c.num("growth.seed.amplitude", 0.1),
                                      c.num("growth.seed.anchor", lo));
    return GrowthLaw::dyadic(s, lo, hi);
  }
  throw ConfigError("growth.kind: unknown kind '" + kind + "'");
}

inline Density1D xi_from(const Config& c, double eps) {
  std::string kind = c.str("cycle.xi", "truncated_normal");
  if (kind == "truncated_normal")
    return Density1D::truncated_normal(-eps, eps, 0.0, c.num("cycle.xi.sigma", eps / 2.5));
  if (kind == "uniform") return Density1D::uniform(-eps, eps);
  if (kind == "beta") return Density1D::beta(-eps, eps, c.num("cycle.xi.shape", 2.0));
  throw ConfigError("cycle.xi: unknown density '" + kind + "'");
}

// Initial-size window: explicit, or the invariant interval of a target-size model.
inline std::pair<double, double> window_from(const Config& c) {
  std::string mode = c.str("window.mode", c.has("window.lo") ? "explicit" : "target");
  if (mode == "explicit") {
    double lo = c.num("window.lo"), hi = c.num("window.hi");
    if (!(lo > 0 && hi > lo)) throw ConfigError("window needs 0 < window.lo < window.hi");
    return {lo, hi};
  }
  if (mode != "target") throw ConfigError("window.mode: unknown mode '" + mode + "'");
  if (c.str("cycle.kind") != "target_size") throw ConfigError("window.mode=target needs cycle.kind=target_size");
  double x0 = c.num("cycle.x0"), eps = c.num("cycle.eps"), alpha = c.num("cycle.alpha", 1.0);
  if (!(x0 > 0 && eps > 0)) throw ConfigError("target window needs cycle.x0 > 0 and cycle.eps > 0");
  if (alpha == 1.0) {
    // Division sizes are pi_xi(2 x0), xi in [-eps, eps]: the window is half of that range.
    // A table fixes its own range; closed forms get room for long delays.
    bool table = c.str("growth.kind") == "tabulated";
    GrowthLaw wide = table ? law_from(c, 0.5 * x0, 1.5 * x0) : law_from(c, 0.125 * x0, 4.0 * x0);
    auto lo = wide.try_flow(2.0 * x0, -eps), hi = wide.try_flow(2.0 * x0, eps);
    if (!lo || !hi) throw ConfigError("target window: pi_(+-eps)(2 x0) leaves the range of the growth law");
    return {0.5 * *lo, 0.5 * *hi};
  }
  if (c.str("growth.kind") != "exponential" || !(alpha > 0))
    throw ConfigError("window.mode=target with alpha != 1 needs exponential growth and alpha > 0");
  double k = c.num("growth.kappa");
  return {x0 * std::exp(-k * eps / alpha), x0 * std::exp(k * eps / alpha)};
}

inline CycleModel model_from(const Config& c, const GrowthLaw& law, double lo, double hi) {
  std::string kind = c.str("cycle.kind");
  if (kind == "target_size") {
    double eps = c.num("cycle.eps");
    if (!(eps > 0)) throw ConfigError("cycle.eps must be positive");
    return CycleModel::target_size(c.num("cycle.alpha", 1.0), c.num("cycle.x0"), xi_from(c, eps), law);
  }
  if (kind == "constant_delta") {
    if (c.str("growth.kind") != "exponential") throw ConfigError("constant_delta needs growth.kind=exponential");
    double k = c.num("cycle.kappa", c.num("growth.kappa"));
    auto h = density_from(c, "cycle.delta", c.num("cycle.delta.lo"), c.num("cycle.delta.hi"), "uniform");
    return CycleModel::constant_delta(k, h, lo, hi);
  }
  if (kind == "tabulated") {
    auto rows = read_numeric_csv(c.str("cycle.file"), 3, "x_b,a,q");
    std::vector<double> xb, a, q;
    for (const auto& r : rows) {
      if (xb.empty() || r[0] != xb.back()) xb.push_back(r[0]);
      if (xb.size() == 1) a.push_back(r[1]);
      q.push_back(r[2]);
    }
    if (q.size() != xb.size() * a.size()) throw ConfigError(c.str("cycle.file") + ": grid is not rectangular");
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (rows[k][1] != a[k % a.size()]) throw ConfigError(c.str("cycle.file") + ": ages differ between rows");
    return CycleModel::tabulated(xb, a, q);
  }
  throw ConfigError("cycle.kind: unknown kind '" + kind + "'");
}

}  // namespace detail

inline Scenario build_scenario(const Config& c) {
  auto [lo, hi] = detail::window_from(c);
  std::optional<HeteroDivisionRule> rule;
  std::string hk = c.str("hetero.kind", "none");
  GrowthLaw law = detail::law_from(c, lo, hi);
  std::optional<CycleModel> model;
  if (hk == "crescentus") {
    // Type 0 stalked, type 1 swarmer. A swarmer grows for rho, e^{kappa rho} = beta_00 / beta_01,
    // into the stalked window and then follows the stalked cycle.
    if (c.str("growth.kind") != "exponential") throw ConfigError("crescentus preset needs exponential growth");
    auto r = c.matrix("hetero.r"), beta = c.matrix("hetero.beta");
    if (r.size() != 2 || beta.size() != 2 || beta[0].size() != 2 || beta[1].size() != 2)
      throw ConfigError("crescentus preset needs 2x2 hetero.r and hetero.beta");
    for (const auto& row : beta)
      for (double b : row)
        if (!(b > 0 && b < 1)) throw InvalidInput("hetero.beta entries must lie in (0, 1)");
    if (beta[0][0] != beta[1][0] || beta[0][1] != beta[1][1])
      throw ConfigError("crescentus preset needs beta_0j = beta_1j");
    double k = c.num("growth.kappa");
    double rho = std::log(beta[0][0] / beta[0][1]) / k;
    if (!(rho > 0)) throw ConfigError("crescentus preset needs beta_00 > beta_01");
    double lo2 = lo * beta[0][1] / beta[0][0], hi2 = hi * beta[0][1] / beta[0][0];
    law = GrowthLaw::exponential(k, lo2, hi);
    CycleModel q1 = detail::model_from(c, law, lo, hi);
    CycleModel q2 = CycleModel::delayed(q1, rho, law, lo2, hi2);
    rule.emplace(r, beta, std::vector<GrowthLaw>{law, law}, std::vector<CycleModel>{q1, q2});
    model = q1;
  } else if (hk != "none") {
    throw ConfigError("hetero.kind: unknown kind '" + hk + "'");
  } else {
    model = detail::model_from(c, law, lo, hi);
  }
  Scenario s{c, law, *model, rule};
  s.nodes = static_cast<int>(c.integer("grid.nodes", 256));
  s.levels = static_cast<int>(c.integer("grid.levels", 512));
  s.horizon_cycles = c.num("horizon.cycles", 20.0);
  s.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  if (s.nodes < 16 || s.levels < 16) throw ConfigError("grid.nodes and grid.levels must be >= 16");
  if (!(s.horizon_cycles > 0)) throw ConfigError("horizon.cycles must be positive");
  return s;
}

inline AbmModel build_abm_model(const Scenario& s) {
  const Config& c = s.cfg;
  AbmModel m = s.is_hetero() ? AbmModel(*s.hetero, c.flag("abm.paired", false)) : AbmModel(s.law, s.model);
  std::string mode = c.str("abm.mode", "deterministic");
  if (mode == "inherited_rate") {
    double lo = c.num("abm.rate.lo"), hi = c.num("abm.rate.hi");
    auto base = detail::density_from(c, "abm.rate", lo, hi, "uniform");
    m.inherited_rate(GrowthRateDistribution(base, c.num("abm.rate.slope", 0.0), c.num("abm.rate.x_ref", 0.0)));
  } else if (mode == "sde") {
    SdeOptions o;
    o.s0 = c.num("abm.s0", 0.0);
    o.power_noise = c.flag("abm.power_noise", false);
    o.gamma = c.num("abm.gamma", 1.0);
    o.dt = c.num("abm.dt", 0.0);
    m.sde(o);
  } else if (mode != "deterministic") {
    throw ConfigError("abm.mode: unknown mode '" + mode + "'");
  }
  return m;
}

}  // namespace cellcycle
