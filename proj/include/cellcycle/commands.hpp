#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "abm.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "hetero.hpp"
#include "scenario.hpp"
#include "spectral.hpp"
#include "transport.hpp"
#include "validate.hpp"

namespace cellcycle {

struct CliOptions {
  std::string out = "out";
  int threads = 1;
  std::optional<int> grid;
  std::optional<double> t_end;
  std::optional<long> cells;
  std::optional<std::uint64_t> seed;
};

enum ExitCode { kOk = 0, kParse = 1, kAssumption = 2, kNumerical = 3 };

namespace detail {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kParse;
  } catch (const AssumptionViolation& e) {
    err << "assumption violation: " << e.what() << '\n';
    return kAssumption;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kNumerical;
  }
}

inline std::string out_path(const CliOptions& o, const std::string& name) {
  std::filesystem::create_directories(o.out);
  return (std::filesystem::path(o.out) / name).string();
}

// Keys under another command's section are expected to be idle.
inline void warn_unused(const Config& c, std::ostream& err, const std::vector<std::string>& own = {}) {
  static const std::vector<std::string> sections{"abm.", "evolve.", "chemostat."};
  for (const auto& k : c.unused()) {
    bool other = false;
    for (const auto& p : sections) other = other || (k.rfind(p, 0) == 0 && std::find(own.begin(), own.end(), p) == own.end());
    if (!other) err << "warning: config key '" << k << "' was not used\n";
  }
}

inline void require_single_type(const Scenario& s, const char* what) {
  if (s.is_hetero()) throw InvalidInput(std::string(what) + " covers single-type models only");
}

inline std::shared_ptr<const SpectralSolution> spectral_for(const Scenario& s, int nodes, int threads) {
  return std::make_shared<const SpectralSolution>(
      solve_spectral(s.law, s.model, nodes, static_cast<std::size_t>(s.levels), threads));
}

}  // namespace detail

inline int cmd_validate(const Config& cfg, const CliOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    Scenario s = build_scenario(cfg);
    AssumptionReport rep = s.is_hetero() ? validate_hetero(*s.hetero) : validate_assumptions(s.law, s.model);
    out << rep.text();
    {
      std::ofstream f(detail::out_path(o, "validate.csv"), std::ios::binary);
      f << "# config_hash=" << cfg.hash() << '\n' << rep.csv();
    }
    if (s.is_hetero())
      for (const auto& w : hetero_warnings(*s.hetero)) err << "warning: " << w << '\n';
    if (!rep.core_ok()) return int(kAssumption);
    if (!rep.aeg_ok()) err << "warning: A7 fails; spectral quantities hold but asynchronous growth is not expected\n";
    detail::warn_unused(cfg, err);
    return int(kOk);
  });
}

inline int cmd_spectral(const Config& cfg, const CliOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    Scenario s = build_scenario(cfg);
    detail::require_single_type(s, "spectral analysis");
    int nodes = o.grid.value_or(s.nodes);
    auto sp = detail::spectral_for(s, nodes, o.threads);
    const std::string h = cfg.hash();
    {
      std::ofstream f(detail::out_path(o, "lambda.txt"), std::ios::binary);
      f << "# config_hash=" << h << '\n';
      f << "lambda=" << fmt17(sp->lambda) << " r_K=" << fmt17(sp->r_K) << " r_J=" << fmt17(sp->r_J)
        << " adjoint_gap=" << fmt17(sp->adjoint_gap) << " f_residual=" << fmt17(sp->f_residual)
        << " c1=" << fmt17(sp->c1) << " c2=" << fmt17(sp->c2) << " nodes=" << nodes << '\n';
    }
    {
      CsvWriter w(detail::out_path(o, "spectral.csv"), h, {"x_b", "f_tilde", "v_tilde"});
      for (std::size_t i = 0; i < sp->grid.size(); ++i) w.row({sp->grid.nodes()[i], sp->f_tilde[i], sp->v_tilde[i]});
    }
    {
      CsvWriter w(detail::out_path(o, "eig2d.csv"), h, {"x_b", "a", "f_i", "v"});
      for (std::size_t i = 0; i < sp->grid.size(); ++i)
        for (std::size_t k = 0; k < sp->ages.inside[i]; ++k)
          w.row({sp->grid.nodes()[i], sp->ages.age(k), sp->f_full(i, k), sp->v_full(i, k)});
    }
    out << "lambda = " << fmt17(sp->lambda) << '\n';
    out << "|r(K)-1| = " << fmt17(sp->r_K) << "  |r(J)-1| = " << fmt17(sp->r_J)
        << "  adjoint gap = " << fmt17(sp->adjoint_gap) << '\n';
    detail::warn_unused(cfg, err);
    return int(kOk);
  });
}

namespace detail {

inline void write_snapshot(const TransportState& st, const CliOptions& o, const std::string& h, std::size_t k) {
  const auto& ag = st.setup().ages();
  const auto& grid = st.setup().grid();
  {
    CsvWriter w(out_path(o, "z_t" + std::to_string(k) + ".csv"), h, {"x_b", "a", "z", "u"});
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t l = 0; l < ag.inside[i]; ++l) w.row({grid.nodes()[i], ag.age(l), st.z(i, l), st.u(i, l)});
  }
  SizeTable sz = age_size_transform(st, 256);
  CsvWriter w(out_path(o, "w_t" + std::to_string(k) + ".csv"), h, {"x", "a", "w"});
  for (std::size_t j = 0; j < sz.x.size(); ++j)
    for (std::size_t l = 0; l < sz.levels; ++l)
      if (double v = sz.w[j * sz.levels + l]; v != 0.0) w.row({sz.x[j], ag.age(l), v});
}

}  // namespace detail

inline int cmd_evolve(const Config& cfg, const CliOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    Scenario s = build_scenario(cfg);
    detail::require_single_type(s, "transport");
    const auto& m = s.model;
    std::string init = cfg.str("evolve.init", "eigen");
    if (init == "dirac") throw ConfigError("evolve.init=dirac: point masses are handled by the abm command");
    auto sp = detail::spectral_for(s, o.grid.value_or(s.nodes), o.threads);
    auto setup = TransportSetup::from_spectral(s.law, s.model, sp, o.threads);
    Table2D u0;
    if (init == "eigen") {
      u0 = tabulate(sp->grid, sp->ages, [&](double, double) { return 0.0; });
      for (std::size_t i = 0; i < sp->grid.size(); ++i)
        for (std::size_t k = 0; k < sp->ages.inside[i]; ++k) u0(i, k) = setup->phi()(i, k) * sp->f_full(i, k);
    } else if (init == "bump") {
      double c0 = cfg.num("evolve.bump.center", 0.5), a0 = cfg.num("evolve.bump.age", 0.1);
      u0 = tabulate(sp->grid, sp->ages, [&](double x, double a) {
        double c = (x - m.x_lo()) / (m.x_hi() - m.x_lo());
        return m.phi(x, a) * std::exp(-200.0 * (c - c0) * (c - c0)) * std::exp(-40.0 * (a - a0) * (a - a0));
      });
    } else {
      throw ConfigError("evolve.init: unknown initial state '" + init + "'");
    }
    TransportState st = init_state(u0, setup);
    const double t_end = o.t_end.value_or(default_horizon(m, s.horizon_cycles));
    if (!(t_end > 0)) throw InvalidInput("--t-end must be positive");
    const std::string h = cfg.hash();

    // Snapshots at the first record at or after each requested time; the end state always.
    std::vector<double> snaps;
    if (cfg.has("evolve.snapshots")) snaps = cfg.list("evolve.snapshots");
    std::sort(snaps.begin(), snaps.end());
    std::size_t next = 0, written = 0;
    EvolveOptions eo;
    eo.record_every = static_cast<std::size_t>(cfg.integer("evolve.record_every", 64));
    eo.observer = [&](const TransportState& now) {
      if (next < snaps.size() && now.t() >= snaps[next] - 0.5 * now.dz()) {
        detail::write_snapshot(now, o, h, written++);
        while (next < snaps.size() && now.t() >= snaps[next] - 0.5 * now.dz()) ++next;
      }
    };
    EvolveReport rep = evolve(st, t_end, *sp, eo);
    detail::write_snapshot(st, o, h, written);

    std::optional<ChemostatReport> chem;
    if (cfg.has("chemostat.D")) {
      std::string d = cfg.str("chemostat.D");
      chem = chemostat_rescale(rep, d == "lambda" ? sp->lambda : cfg.num("chemostat.D"));
    }
    {
      std::vector<std::string> cols{"t", "births", "population", "conserved", "aeg_l1", "eigen_drift"};
      if (chem) {
        cols.push_back("chemostat_births");
        cols.push_back("chemostat_population");
      }
      CsvWriter w(detail::out_path(o, "evolve.csv"), h, cols);
      for (std::size_t k = 0; k < rep.t.size(); ++k) {
        std::vector<double> r{rep.t[k], rep.births[k], rep.population[k], rep.conserved[k], rep.aeg_l1[k],
                              rep.eigen_drift[k]};
        if (chem) {
          r.push_back(chem->births[k]);
          r.push_back(chem->population[k]);
        }
        w.row(r);
      }
    }
    double cmax = 0.0;
    for (double c : rep.conserved) cmax = std::max(cmax, std::abs(c / rep.c0 - 1.0));
    out << "lambda = " << fmt17(sp->lambda) << "  t_end = " << fmt17(rep.t.back()) << '\n';
    out << "final L1 distance to the stable profile = " << fmt17(rep.aeg_l1.back()) << '\n';
    out << "max |C(t)/C(0) - 1| = " << fmt17(cmax) << '\n';
    if (chem)
      out << "chemostat D = " << fmt17(chem->dilution) << (chem->steady ? "  steady" : "  not steady")
          << " (spread " << fmt17(chem->spread) << ")\n";
    detail::warn_unused(cfg, err, {"evolve.", "chemostat."});
    return int(kOk);
  });
}

inline int cmd_abm(const Config& cfg, const CliOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    Scenario s = build_scenario(cfg);
    AbmModel model = build_abm_model(s);
    const std::uint64_t seed = o.seed.value_or(s.seed);
    const std::size_t n_max = static_cast<std::size_t>(o.cells.value_or(cfg.integer("abm.n_max", 100000)));
    if (n_max < 2) throw InvalidInput("--cells must be at least 2");
    const double P = model.mean_cycle();
    const double t_end = o.t_end.value_or(cfg.num("abm.cycles", 30.0) * P);
    const int type0 = static_cast<int>(cfg.integer("abm.type", 0));

    std::string start = cfg.str("abm.start", "uniform");
    Population pop;
    if (start == "uniform") {
      const CycleModel& m = model.rule().model(type0);
      auto founders = static_cast<std::size_t>(cfg.integer("abm.founders", static_cast<long>(std::min<std::size_t>(10000, n_max / 2))));
      pop = seed_population(model, founders, Density1D::uniform(m.x_lo(), m.x_hi()), seed, type0);
    } else if (start == "dirac") {
      pop = seed_dirac(model, cfg.num("abm.dirac"), seed, type0);
    } else if (start == "sizes") {
      std::vector<int> tags;
      if (cfg.has("abm.tags"))
        for (double t : cfg.list("abm.tags")) tags.push_back(static_cast<int>(t));
      pop = seed_sizes(model, cfg.list("abm.sizes"), tags, seed, type0);
    } else {
      throw ConfigError("abm.start: unknown start '" + start + "'");
    }

    RunOptions ro;
    ro.n_max = n_max;
    ro.record_dt = cfg.num("abm.record_dt", 0.0);
    ro.track_sizes = cfg.flag("abm.track_sizes", false);
    if (cfg.has("abm.census")) {
      ro.census_times = cfg.list("abm.census");
    } else if (cfg.has("abm.census_every")) {
      double every = cfg.num("abm.census_every") * P;
      if (!(every > 0)) throw ConfigError("abm.census_every must be positive");
      for (double t = every; t <= t_end * (1 + 1e-12); t += every) ro.census_times.push_back(std::min(t, t_end));
    } else {
      ro.census_times = {t_end};
    }
    const bool compare = cfg.flag("abm.compare", false);
    if (compare) ro.births_from = t_end - P;

    Trajectory tr = run(pop, model, t_end, ro);
    const std::string h = cfg.hash();
    const std::size_t nt = model.n_types();
    {
      std::vector<std::string> cols{"t", "count", "weight", "est_population"};
      for (std::size_t j = 0; j < nt; ++j) cols.push_back("type_" + std::to_string(j));
      if (ro.track_sizes) {
        cols.push_back("distinct_sizes");
        cols.push_back("generations");
      }
      CsvWriter w(detail::out_path(o, "abm.csv"), h, cols);
      for (std::size_t k = 0; k < tr.t.size(); ++k) {
        std::vector<double> r{tr.t[k], tr.count[k], tr.weight[k], tr.weight[k] * tr.count[k]};
        for (std::size_t j = 0; j < nt; ++j) r.push_back(tr.type_counts[k][j]);
        if (ro.track_sizes) {
          r.push_back(static_cast<double>(tr.distinct_sizes[k]));
          r.push_back(static_cast<double>(tr.generations[k]));
        }
        w.row(r);
      }
    }
    for (std::size_t c = 0; c < tr.censuses.size(); ++c) {
      const Census& cs = tr.censuses[c];
      CsvWriter w(detail::out_path(o, "census_t" + std::to_string(c) + ".csv"), h,
                  {"type", "x_b", "a", "generation", "weight"});
      for (const auto& r : cs.rows)
        w.row({static_cast<double>(r.type), r.x_b, r.a, static_cast<double>(r.generation), cs.weight});
    }

    out << "divisions = " << tr.divisions << "  final cells = " << pop.cells.size()
        << "  weight = " << fmt17(pop.weight) << '\n';
    if (tr.t.back() - tr.t.front() >= 10.0 * P) {
      MalthusEstimate e = estimate_malthus(tr);
      out << "lambda_hat = " << fmt17(e.lambda_hat) << " +- " << fmt17(e.stderr) << '\n';
      if (nt > 1)
        for (std::size_t j = 0; j < nt; ++j) {
          MalthusEstimate ej = estimate_malthus(tr, 10.0, static_cast<int>(j));
          out << "lambda_hat[type " << j << "] = " << fmt17(ej.lambda_hat) << " +- " << fmt17(ej.stderr) << '\n';
        }
    } else {
      out << "trajectory shorter than 10 mean cycles: no growth-rate estimate\n";
    }
    if (ro.track_sizes && !tr.censuses.empty()) {
      long worst = 0, bound = 0;
      bool disjoint = true, equal = true;
      for (const Census& cs : tr.censuses) {
        ParadoxCensus pc = paradox_census(cs, model.rule().law(0));
        worst = std::max(worst, pc.generations_alive);
        bound = pc.bound;
        disjoint = disjoint && pc.tags_disjoint;
        equal = equal && pc.distinct_sizes == pc.generations_alive;
      }
      out << "generations alive <= " << worst << " (bound " << bound << "), sizes one per generation: "
          << (equal ? "yes" : "no") << ", tagged size sets disjoint: " << (disjoint ? "yes" : "no") << '\n';
    }
    if (compare) {
      detail::require_single_type(s, "abm.compare");
      auto sp = detail::spectral_for(s, s.nodes, o.threads);
      ProfileCdf cdf(sp->grid, sp->f_tilde);
      double ks = ks_distance(tr.birth_x, tr.birth_w, [&](double x) { return cdf(x); });
      out << "lambda (spectral) = " << fmt17(sp->lambda) << "  KS(birth sizes) = " << fmt17(ks) << '\n';
    }
    detail::warn_unused(cfg, err, {"abm."});
    return int(kOk);
  });
}

}  // namespace cellcycle
