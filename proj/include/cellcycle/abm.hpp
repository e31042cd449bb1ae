#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "cycle.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "hetero.hpp"
#include "numeric.hpp"
#include "spectral.hpp"

namespace cellcycle {

enum class GrowthMode { deterministic, inherited_rate, sde };

struct SdeOptions {
  double s0 = 0.0;
  bool power_noise = false;  // sigma = s0 x^gamma; paths may reach zero
  double gamma = 1.0;
  double dt = 0.0;           // 0 selects 1e-3 of the mean cycle
};

struct Cell {
  std::uint64_t id = 0;
  int type = 0;
  double x_b = 0.0;
  double birth_time = 0.0;
  double tau = 0.0;
  double kappa_draw = std::numeric_limits<double>::quiet_NaN();
  double x_div = 0.0;  // size reached at birth_time + tau
  int generation = 0;
  int tag = 0;         // label inherited from the founding cell
};

struct Population {
  std::vector<Cell> cells;
  double weight = 1.0;
  double t = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t next_id = 0;
  std::uint64_t thinnings = 0;
};

namespace detail {
constexpr std::uint64_t kInitStream = 0x243f6a8885a308d3ULL;
constexpr std::uint64_t kPathStream = 0x13198a2e03707344ULL;
constexpr std::uint64_t kThinStream = 0xa4093822299f31d0ULL;
}  // namespace detail

// Division rule, per-type growth and cycle models, and the growth mode used by the simulator.
class AbmModel {
 public:
  AbmModel(GrowthLaw law, CycleModel model)
      : rule_({{1.0}}, {{0.5}}, {std::move(law)}, {std::move(model)}) {
    init_cycle();
  }
  explicit AbmModel(HeteroDivisionRule rule, bool paired = false) : rule_(std::move(rule)), paired_(paired) {
    if (paired_) {
      if (rule_.n_types() != 2) throw InvalidInput("paired division needs exactly two types");
      for (std::size_t i = 0; i < 2; ++i)
        if (rule_.r(i, 0) != 0.5 || rule_.r(i, 1) != 0.5)
          throw InvalidInput("paired division needs r_ij = 1/2");
    }
    init_cycle();
  }

  AbmModel& inherited_rate(GrowthRateDistribution dist) {
    mode_ = GrowthMode::inherited_rate;
    rate_ = std::move(dist);
    return *this;
  }
  AbmModel& sde(SdeOptions opt) {
    if (!(opt.s0 >= 0)) throw InvalidInput("sde: s0 must be nonnegative");
    mode_ = GrowthMode::sde;
    sde_ = opt;
    if (sde_.dt == 0.0) sde_.dt = 1e-3 * mean_cycle_;
    if (!(sde_.dt > 0)) throw StepUnderflow("sde: step must be positive");
    return *this;
  }

  const HeteroDivisionRule& rule() const { return rule_; }
  std::size_t n_types() const { return rule_.n_types(); }
  bool paired() const { return paired_; }
  GrowthMode mode() const { return mode_; }
  const SdeOptions& sde_options() const { return sde_; }
  double mean_cycle() const { return mean_cycle_; }

  // Fills tau, kappa_draw and x_div for a cell whose type and x_b are set.
  void plan(Cell& c, double u_tau, double u_kappa, std::uint64_t seed) const {
    const CycleModel& m = rule_.model(c.type);
    c.x_b = m.window_check(c.x_b);
    c.tau = m.sample_tau(c.x_b, u_tau);
    if (mode_ == GrowthMode::inherited_rate) c.kappa_draw = rate_->sample(c.x_b, u_kappa);
    c.x_div = size_at(c, c.tau, seed);
  }

  // Size of the cell at age a (0 <= a <= tau).
  double size_at(const Cell& c, double a, std::uint64_t seed) const {
    const GrowthLaw& law = rule_.law(c.type);
    switch (mode_) {
      case GrowthMode::deterministic:
        return law.flow(c.x_b, a);
      case GrowthMode::inherited_rate:
        return c.x_b * std::exp(c.kappa_draw * a);
      case GrowthMode::sde:
        return sde_path(c, a, seed);
    }
    return 0.0;
  }

 private:
  void init_cycle() {
    const CycleModel& m = rule_.model(0);
    mean_cycle_ = m.mean_cycle(0.5 * (m.x_lo() + m.x_hi()));
  }

  // Euler-Maruyama on the grid h = tau / ceil(tau / dt); the noise stream is keyed by the cell id
  // so intermediate sizes can be regenerated.
  double sde_path(const Cell& c, double a, std::uint64_t seed) const {
    const GrowthLaw& law = rule_.law(c.type);
    const double x_lo = rule_.model(c.type).x_lo();
    if (!(c.tau > 0)) return c.x_b;
    auto n = static_cast<std::uint64_t>(std::ceil(c.tau / sde_.dt));
    n = std::max<std::uint64_t>(n, 1);
    double h = c.tau / static_cast<double>(n);
    if (!(h > 0)) throw StepUnderflow("sde: non-positive Euler-Maruyama step");
    double sq = std::sqrt(h);
    Stream noise(seed ^ detail::kPathStream, c.id);
    double x = c.x_b;
    double steps = std::min(a, c.tau) / h;
    auto full = static_cast<std::uint64_t>(std::floor(steps));
    full = std::min(full, n);
    for (std::uint64_t k = 0; k < full; ++k) {
      double sigma = sde_.power_noise ? sde_.s0 * std::pow(x, sde_.gamma) : sde_.s0 * (x - x_lo);
      x += law.drift(x) * h + sigma * sq * noise.normal();
      if (!(x > 0)) throw DomainExit("sde path reached zero size");
    }
    double frac = steps - static_cast<double>(full);
    if (full < n && frac > 0) {
      double sigma = sde_.power_noise ? sde_.s0 * std::pow(x, sde_.gamma) : sde_.s0 * (x - x_lo);
      double next = x + law.drift(x) * h + sigma * sq * noise.normal();
      x += frac * (next - x);
    }
    return x;
  }

  HeteroDivisionRule rule_;
  bool paired_ = false;
  GrowthMode mode_ = GrowthMode::deterministic;
  std::optional<GrowthRateDistribution> rate_;
  SdeOptions sde_;
  double mean_cycle_ = 0.0;
};

namespace detail {

inline Cell founder(const AbmModel& model, Population& pop, double x_b, int type, int tag) {
  if (type < 0 || static_cast<std::size_t>(type) >= model.n_types()) throw InvalidInput("unknown cell type");
  Cell c;
  c.id = pop.next_id++;
  c.type = type;
  c.x_b = x_b;
  c.tag = tag;
  Stream s(pop.seed, c.id);
  s.uniform();  // type draw slot, unused for founders
  double u_tau = s.uniform(), u_kappa = s.uniform();
  model.plan(c, u_tau, u_kappa, pop.seed);
  return c;
}

}  // namespace detail

// n founders at age 0 with x_b drawn from a density on the type window.
inline Population seed_population(const AbmModel& model, std::size_t n, const Density1D& x_b_density,
                                  std::uint64_t seed, int type = 0) {
  if (n < 1) throw InvalidInput("seed_population needs n >= 1");
  Population pop;
  pop.seed = seed;
  pop.cells.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Stream init(seed ^ detail::kInitStream, k);
    double x = x_b_density.quantile(init.uniform());
    pop.cells.push_back(detail::founder(model, pop, x, type, 0));
  }
  return pop;
}

// Founders with given sizes and tags.
inline Population seed_sizes(const AbmModel& model, const std::vector<double>& sizes, const std::vector<int>& tags,
                             std::uint64_t seed, int type = 0) {
  if (sizes.empty()) throw InvalidInput("seed_sizes needs at least one cell");
  if (!tags.empty() && tags.size() != sizes.size()) throw InvalidInput("seed_sizes: one tag per size");
  Population pop;
  pop.seed = seed;
  for (std::size_t k = 0; k < sizes.size(); ++k)
    pop.cells.push_back(detail::founder(model, pop, sizes[k], type, tags.empty() ? 0 : tags[k]));
  return pop;
}

inline Population seed_dirac(const AbmModel& model, double x_b, std::uint64_t seed, int type = 0) {
  return seed_sizes(model, {x_b}, {}, seed, type);
}

// Halves the population when it exceeds n_max. The kept count is N/2 rounded up or down with
// probability 1/2 each when N is odd, so weight * count stays unbiased; cells are chosen uniformly.
inline void control_population(Population& pop, std::size_t n_max) {
  if (n_max < 2) throw InvalidInput("control_population needs n_max >= 2");
  const std::size_t N = pop.cells.size();
  if (N <= n_max) return;
  Stream s(pop.seed ^ detail::kThinStream, pop.thinnings++);
  std::size_t keep = N / 2;
  if (N % 2 == 1 && s.uniform() < 0.5) ++keep;
  std::sort(pop.cells.begin(), pop.cells.end(), [](const Cell& a, const Cell& b) { return a.id < b.id; });
  for (std::size_t k = 0; k < keep; ++k) {
    std::size_t j = k + static_cast<std::size_t>(s.uniform() * static_cast<double>(N - k));
    j = std::min(j, N - 1);
    std::swap(pop.cells[k], pop.cells[j]);
  }
  pop.cells.resize(keep);
  std::sort(pop.cells.begin(), pop.cells.end(), [](const Cell& a, const Cell& b) { return a.id < b.id; });
  pop.weight *= 2.0;
}

struct CensusRow {
  int type = 0;
  double x_b = 0.0, a = 0.0, size = 0.0;
  int generation = 0, tag = 0;
};

struct Census {
  double t = 0.0;
  double weight = 1.0;
  std::vector<CensusRow> rows;
};

struct RunOptions {
  double record_dt = 0.0;  // 0 selects mean cycle / 50
  std::vector<double> census_times;
  std::size_t n_max = 1000000;
  bool track_sizes = false;  // distinct sizes and generations per record (O(N log N) each)
  double births_from = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  std::vector<double> t, count, weight;
  std::vector<std::vector<double>> type_counts;  // [record][type]
  std::vector<long> distinct_sizes, generations;
  std::vector<Census> censuses;
  std::vector<double> birth_x, birth_w;
  std::vector<int> birth_type;
  std::uint64_t divisions = 0;
  double mean_cycle = 0.0;
};

// Number of distinct values up to a relative tolerance.
inline long count_distinct(std::vector<double> v, double rel = 1e-9) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  long n = 1;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] - v[k - 1] > rel * std::abs(v[k])) ++n;
  return n;
}

inline Census take_census(const Population& pop, const AbmModel& model, double t) {
  Census c;
  c.t = t;
  c.weight = pop.weight;
  c.rows.reserve(pop.cells.size());
  for (const Cell& cell : pop.cells) {
    double a = t - cell.birth_time;
    c.rows.push_back({cell.type, cell.x_b, a, model.size_at(cell, a, pop.seed), cell.generation, cell.tag});
  }
  return c;
}

inline Trajectory run(Population& pop, const AbmModel& model, double t_end, const RunOptions& opt = {}) {
  if (!(t_end > pop.t)) throw InvalidInput("run needs t_end > current time");
  const std::size_t nt = model.n_types();
  const double dt = opt.record_dt > 0 ? opt.record_dt : model.mean_cycle() / 50.0;
  Trajectory tr;
  tr.mean_cycle = model.mean_cycle();

  std::vector<double> counts(nt, 0.0);
  auto recount = [&] {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (const Cell& c : pop.cells) counts[c.type] += 1.0;
  };
  recount();

  using Event = std::tuple<double, std::uint64_t, std::size_t>;  // (time, id, slot)
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap;
  auto rebuild = [&] {
    std::vector<Event> ev;
    ev.reserve(pop.cells.size());
    for (std::size_t s = 0; s < pop.cells.size(); ++s)
      ev.emplace_back(pop.cells[s].birth_time + pop.cells[s].tau, pop.cells[s].id, s);
    heap = decltype(heap)(std::greater<Event>(), std::move(ev));
  };
  rebuild();

  auto census_times = opt.census_times;
  std::sort(census_times.begin(), census_times.end());
  std::size_t next_census = 0;
  while (next_census < census_times.size() && census_times[next_census] < pop.t) ++next_census;

  const double t0 = pop.t;
  std::uint64_t next_record = 0;
  auto record_time = [&](std::uint64_t k) { return std::min(t0 + static_cast<double>(k) * dt, t_end); };
  bool recorded_end = false;

  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.count.push_back(static_cast<double>(pop.cells.size()));
    tr.weight.push_back(pop.weight);
    tr.type_counts.push_back(counts);
    if (opt.track_sizes) {
      std::vector<double> sizes;
      std::vector<double> gens;
      sizes.reserve(pop.cells.size());
      for (const Cell& c : pop.cells) {
        sizes.push_back(model.size_at(c, t - c.birth_time, pop.seed));
        gens.push_back(c.generation);
      }
      tr.distinct_sizes.push_back(count_distinct(sizes));
      tr.generations.push_back(count_distinct(gens, 0.0));
    }
  };

  for (;;) {
    double t_event = heap.empty() ? INFINITY : std::get<0>(heap.top());
    double t_rec = recorded_end ? INFINITY : record_time(next_record);
    double t_cen = next_census < census_times.size() && census_times[next_census] <= t_end
                       ? census_times[next_census]
                       : INFINITY;
    double t_obs = std::min(t_rec, t_cen);
    if (t_obs < t_event) {
      pop.t = t_obs;
      if (t_cen <= t_rec) {
        tr.censuses.push_back(take_census(pop, model, t_cen));
        ++next_census;
      } else {
        record(t_rec);
        if (t_rec >= t_end) recorded_end = true;
        ++next_record;
      }
      continue;
    }
    if (t_event > t_end) break;

    auto [td, id, slot] = heap.top();
    heap.pop();
    const Cell mother = pop.cells[slot];
    pop.t = td;
    ++tr.divisions;
    counts[mother.type] -= 1.0;
    for (int d = 0; d < 2; ++d) {
      Cell c;
      c.id = pop.next_id++;
      Stream s(pop.seed, c.id);
      double u_type = s.uniform(), u_tau = s.uniform(), u_kappa = s.uniform();
      int j = 0;
      if (model.paired()) {
        j = d;
      } else if (nt > 1) {
        double acc = 0.0;
        j = static_cast<int>(nt) - 1;
        for (std::size_t k = 0; k < nt; ++k) {
          acc += model.rule().r(mother.type, k);
          if (u_type < acc) {
            j = static_cast<int>(k);
            break;
          }
        }
      }
      c.type = j;
      c.x_b = model.rule().beta(mother.type, j) * mother.x_div;
      c.birth_time = td;
      c.generation = mother.generation + 1;
      c.tag = mother.tag;
      model.plan(c, u_tau, u_kappa, pop.seed);
      counts[j] += 1.0;
      if (td >= opt.births_from) {
        tr.birth_x.push_back(c.x_b);
        tr.birth_w.push_back(pop.weight);
        tr.birth_type.push_back(j);
      }
      if (d == 0) {
        pop.cells[slot] = c;
        heap.emplace(c.birth_time + c.tau, c.id, slot);
      } else {
        pop.cells.push_back(c);
        heap.emplace(c.birth_time + c.tau, c.id, pop.cells.size() - 1);
      }
    }
    if (pop.cells.size() > opt.n_max) {
      control_population(pop, opt.n_max);
      recount();
      rebuild();
    }
  }
  pop.t = t_end;
  return tr;
}

struct MalthusEstimate {
  double lambda_hat = 0.0;
  double stderr = 0.0;      // residual treated as a Brownian path (see estimate_malthus)
  double stderr_iid = 0.0;  // textbook formula, independent residuals
  std::size_t samples = 0;
  std::size_t blocks = 0;
};

// Least-squares slope of log(weight * count) over the last half of the trajectory.
// Demographic noise and thinning make the residual a random walk rather than white noise, so the
// reported error propagates a Brownian residual through the slope weights; its diffusion constant
// comes from residual increments over consecutive two-mean-cycle blocks (shorter blocks pick up
// the mean-reverting age-structure noise and inflate it).
// type >= 0 fits that type's count instead of the total.
inline MalthusEstimate estimate_malthus(const Trajectory& tr, double min_cycles = 10.0, int type = -1) {
  if (tr.t.size() < 4 || !(tr.t.back() - tr.t.front() >= min_cycles * tr.mean_cycle))
    throw ShortTrajectory("trajectory spans fewer than " + std::to_string(min_cycles) + " mean cycles");
  const double mid = 0.5 * (tr.t.front() + tr.t.back());
  std::vector<double> t, y;
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    if (tr.t[k] >= mid) {
      t.push_back(tr.t[k]);
      double n = type < 0 ? tr.count[k] : tr.type_counts[k].at(type);
      if (!(n > 0)) throw ShortTrajectory("empty population in the fitting window");
      y.push_back(std::log(tr.weight[k] * n));
    }
  const std::size_t m = t.size();
  if (m < 3) throw ShortTrajectory("too few samples in the fitting window");
  double tm = std::accumulate(t.begin(), t.end(), 0.0) / m;
  double ym = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (t[k] - tm) * (t[k] - tm);
    sxy += (t[k] - tm) * (y[k] - ym);
  }
  MalthusEstimate est;
  est.samples = m;
  est.lambda_hat = sxy / sxx;
  std::vector<double> e(m);
  double rss = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    e[k] = y[k] - ym - est.lambda_hat * (t[k] - tm);
    rss += e[k] * e[k];
  }
  est.stderr_iid = std::sqrt(rss / (m - 2) / sxx);

  double spacing = (t.back() - t.front()) / (m - 1);
  auto L = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(2.0 * tr.mean_cycle / spacing)));
  double ss = 0.0, span = 0.0;
  std::size_t B = 0;
  for (std::size_t k = 0; k + L < m; k += L, ++B) {
    double d = e[k + L] - e[k];
    ss += d * d;
    span += t[k + L] - t[k];
  }
  est.blocks = B;
  if (B < 2) throw ShortTrajectory("fitting window shorter than four mean cycles");
  double diffusion = ss / span * B / (B - 1.0);
  // Var = D * sum_j (t_j - t_{j-1}) (sum_{k >= j} c_k)^2 with c_k = (t_k - tm) / sxx.
  double tail = 0.0, var = 0.0;
  for (std::size_t j = m; j-- > 1;) {
    tail += (t[j] - tm) / sxx;
    var += (t[j] - t[j - 1]) * tail * tail;
  }
  est.stderr = std::sqrt(diffusion * var);
  return est;
}

// CDF of a nonnegative profile given on a quadrature grid, tabulated on a uniform mesh.
class ProfileCdf {
 public:
  ProfileCdf(const QuadratureGrid& grid, const std::vector<double>& f, std::size_t cells = 2048)
      : lo_(grid.lo()), hi_(grid.hi()), cdf_(cells + 1, 0.0) {
    const GaussRule& r = gauss_legendre(8);
    double h = (hi_ - lo_) / cells;
    for (std::size_t k = 0; k < cells; ++k) {
      double mid = lo_ + (k + 0.5) * h, s = 0.0;
      for (int j = 0; j < 8; ++j) s += r.w[j] * std::max(0.0, grid.interpolate(f, mid + 0.5 * h * r.x[j]));
      cdf_[k + 1] = cdf_[k] + 0.5 * h * s;
    }
    double total = cdf_.back();
    if (!(total > 0)) throw InvalidInput("profile has no mass");
    for (double& c : cdf_) c /= total;
  }

  double operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    double pos = (x - lo_) / (hi_ - lo_) * (cdf_.size() - 1);
    auto k = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
    double w = pos - k;
    return (1 - w) * cdf_[k] + w * cdf_[k + 1];
  }

 private:
  double lo_, hi_;
  std::vector<double> cdf_;
};

// Weighted Kolmogorov-Smirnov distance between samples and a CDF.
inline double ks_distance(const std::vector<double>& x, const std::vector<double>& w,
                          const std::function<double(double)>& cdf) {
  if (x.empty()) throw InvalidInput("ks_distance needs samples");
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double total = 0.0;
  for (std::size_t k : idx) total += w.empty() ? 1.0 : w[k];
  double acc = 0.0, d = 0.0;
  for (std::size_t k : idx) {
    double F = cdf(x[k]);
    d = std::max(d, std::abs(F - acc / total));
    acc += w.empty() ? 1.0 : w[k];
    d = std::max(d, std::abs(acc / total - F));
  }
  return d;
}

// Total-variation distance between the census (x_b, a) histogram and the stable density
// f_tilde(x_b) e^{-lambda a} Phi(x_b, a), on a bins x bins mesh over window x [0, max a_hi].
inline double stable_joint_tv(const Census& c, const CycleModel& model, const SpectralSolution& sp, int bins = 10,
                              int type = 0) {
  const double xlo = model.x_lo(), xhi = model.x_hi();
  double amax = global_age_range(model).second;
  std::vector<double> emp(bins * bins, 0.0), ref(bins * bins, 0.0);
  double n = 0.0;
  for (const auto& r : c.rows) {
    if (r.type != type) continue;
    int i = std::clamp(static_cast<int>((r.x_b - xlo) / (xhi - xlo) * bins), 0, bins - 1);
    int k = std::clamp(static_cast<int>(r.a / amax * bins), 0, bins - 1);
    emp[i * bins + k] += 1.0;
    n += 1.0;
  }
  if (!(n > 0)) throw InvalidInput("census holds no cells of this type");
  const GaussRule& r = gauss_legendre(8);
  double hx = (xhi - xlo) / bins, ha = amax / bins, total = 0.0;
  for (int i = 0; i < bins; ++i)
    for (int k = 0; k < bins; ++k) {
      double s = 0.0;
      for (int p = 0; p < 8; ++p) {
        double x = xlo + (i + 0.5 + 0.5 * r.x[p]) * hx;
        double f = std::max(0.0, sp.grid.interpolate(sp.f_tilde, x));
        for (int q = 0; q < 8; ++q) {
          double a = (k + 0.5 + 0.5 * r.x[q]) * ha;
          s += r.w[p] * r.w[q] * f * std::exp(-sp.lambda * a) * model.phi(x, a);
        }
      }
      ref[i * bins + k] = s;
      total += s;
    }
  double tv = 0.0;
  for (int b = 0; b < bins * bins; ++b) tv += std::abs(emp[b] / n - ref[b] / total);
  return 0.5 * tv;
}

struct ParadoxCensus {
  long distinct_sizes = 0;
  long generations_alive = 0;
  long bound = 0;            // floor(2 + log2(x_hi / x_lo))
  bool within_bound = true;
  bool tags_disjoint = true;  // no size shared between differently tagged cells
};

inline void require_homogeneous(const GrowthLaw& law, int grid = 256) {
  for (int k = 0; k < grid; ++k) {
    double x = law.x_lo() + (law.x_hi() - law.x_lo()) * k / (grid - 1);
    double g2 = law.g(2 * x);
    if (std::abs(g2 - 2 * law.g(x)) > 1e-9 * std::abs(g2))
      throw NotHomogeneous("g(2x) != 2 g(x) at x = " + std::to_string(x));
  }
}

inline ParadoxCensus paradox_census(const Census& c, const GrowthLaw& law) {
  require_homogeneous(law);
  ParadoxCensus out;
  std::vector<double> sizes, gens;
  for (const auto& r : c.rows) {
    sizes.push_back(r.size);
    gens.push_back(r.generation);
  }
  out.distinct_sizes = count_distinct(sizes);
  out.generations_alive = count_distinct(gens, 0.0);
  out.bound = static_cast<long>(std::floor(2.0 + std::log2(law.x_hi() / law.x_lo()) + 1e-12));
  out.within_bound = out.generations_alive <= out.bound;
  std::vector<std::pair<double, int>> st;
  for (const auto& r : c.rows) st.emplace_back(r.size, r.tag);
  std::sort(st.begin(), st.end());
  for (std::size_t k = 1; k < st.size(); ++k)
    if (st[k].second != st[k - 1].second && st[k].first - st[k - 1].first <= 1e-9 * std::abs(st[k].first))
      out.tags_disjoint = false;
  return out;
}

}  // namespace cellcycle
