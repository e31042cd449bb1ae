#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cycle.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "numeric.hpp"
#include "spectral.hpp"

namespace cellcycle {

// Precomputed geometry shared by transport states: tables on the age grid and the
// quadrature of the renewal boundary condition.
class TransportSetup {
 public:
  TransportSetup(GrowthLaw law, CycleModel model, QuadratureGrid grid, AgeGrid ages, int threads = 1,
                 std::shared_ptr<const SpectralSolution> spectral = nullptr)
      : law_(std::move(law)),
        model_(std::move(model)),
        grid_(std::move(grid)),
        ages_(std::move(ages)),
        spectral_(std::move(spectral)),
        threads_(threads) {
    const std::size_t n = grid_.size(), L = ages_.levels;
    phi_ = Table2D(n, L);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < ages_.inside[i]; ++k) phi_(i, k) = model_.phi(grid_.nodes()[i], ages_.age(k));
    build_renewal();
  }

  static std::shared_ptr<const TransportSetup> from_spectral(const GrowthLaw& law, const CycleModel& model,
                                                             std::shared_ptr<const SpectralSolution> s,
                                                             int threads = 1) {
    return std::make_shared<TransportSetup>(law, model, s->grid, s->ages, threads, s);
  }

  const GrowthLaw& law() const { return law_; }
  const CycleModel& model() const { return model_; }
  const QuadratureGrid& grid() const { return grid_; }
  const AgeGrid& ages() const { return ages_; }
  const Table2D& phi() const { return phi_; }
  const SpectralSolution* spectral() const { return spectral_.get(); }
  int threads() const { return threads_; }

  struct RenewalPoint {
    double weight;        // quadrature weight times 4 q(y, a) / g(2 x_b)
    double h[4];          // Hermite basis at y: y_j, y_{j+1}, d_j, d_{j+1}
    std::uint32_t j;      // node interval
    std::uint32_t k;      // lower age level
    double frac;          // position between levels k and k+1
  };
  const std::vector<std::vector<RenewalPoint>>& renewal() const { return renewal_; }

 private:
  void build_renewal() {
    const std::size_t n = grid_.size();
    const auto& x = grid_.nodes();
    renewal_.assign(n, {});
    const double ylo = model_.x_lo(), yhi = model_.x_hi();
    const GaussRule& r16 = gauss_legendre(16);
    bool too_coarse = false;
    parallel_for(n, threads_, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double xb = x[i];
        auto density = [&](double y) {
          double a = cycle_age(law_, xb, y);
          return a > 0 ? model_.q(y, a) : 0.0;
        };
        const int M = 512;
        double top = std::min(yhi, 2.0 * xb);
        if (!(top > ylo)) continue;
        std::vector<std::pair<double, double>> pieces;
        double prev_y = ylo;
        bool prev_in = density(ylo) > 0;
        double start = prev_in ? ylo : NAN;
        auto refine = [&](double lo, double hi, bool lo_in) {
          for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            if ((density(mid) > 0) == lo_in) lo = mid;
            else hi = mid;
          }
          return 0.5 * (lo + hi);
        };
        for (int s = 1; s <= M; ++s) {
          double y = ylo + (top - ylo) * s / M;
          bool in = density(y) > 0;
          if (in != prev_in) {
            double edge = refine(prev_y, y, prev_in);
            if (in) start = edge;
            else pieces.emplace_back(start, edge);
          }
          prev_in = in;
          prev_y = y;
        }
        if (prev_in) pieces.emplace_back(start, top);
        auto& pts = renewal_[i];
        for (auto [a0, a1] : pieces) {
          int panels = std::max(2, static_cast<int>(std::ceil(16.0 * (a1 - a0) / (yhi - ylo))));
          double h = (a1 - a0) / panels;
          for (int p = 0; p < panels; ++p)
            for (int k = 0; k < 16; ++k) {
              double y = a0 + (p + 0.5) * h + 0.5 * h * r16.x[k];
              double a = cycle_age(law_, xb, y);
              double q = a > 0 ? model_.q(y, a) : 0.0;
              if (q == 0.0) continue;
              RenewalPoint rp{};
              rp.weight = 0.5 * h * r16.w[k] * 4.0 * q / law_.g(2.0 * xb);
              set_hermite(rp, y);
              double pos = a / ages_.da;
              std::size_t kk = static_cast<std::size_t>(std::floor(pos));
              if (kk < 1) too_coarse = true;
              kk = std::min(kk, ages_.levels - 2);
              rp.k = static_cast<std::uint32_t>(kk);
              rp.frac = std::clamp(pos - kk, 0.0, 1.0);
              pts.push_back(rp);
            }
        }
      }
    });
    if (too_coarse) throw InvalidInput("age grid too coarse: division possible within the first age cell");
  }

  void set_hermite(RenewalPoint& rp, double y) const {
    const auto& x = grid_.nodes();
    const std::size_t n = x.size();
    if (y <= x.front() || y >= x.back()) {
      bool lo = y <= x.front();
      rp.j = lo ? 0 : static_cast<std::uint32_t>(n - 2);
      rp.h[0] = lo ? 1.0 : 0.0;
      rp.h[1] = lo ? 0.0 : 1.0;
      rp.h[2] = rp.h[3] = 0.0;
      return;
    }
    std::size_t j = locate(x, y);
    double h = x[j + 1] - x[j], s = (y - x[j]) / h, s2 = s * s, s3 = s2 * s;
    rp.j = static_cast<std::uint32_t>(j);
    rp.h[0] = 2 * s3 - 3 * s2 + 1;
    rp.h[1] = -2 * s3 + 3 * s2;
    rp.h[2] = (s3 - 2 * s2 + s) * h;
    rp.h[3] = (s3 - s2) * h;
  }

  GrowthLaw law_;
  CycleModel model_;
  QuadratureGrid grid_;
  AgeGrid ages_;
  std::shared_ptr<const SpectralSolution> spectral_;
  int threads_;
  Table2D phi_;
  std::vector<std::vector<RenewalPoint>> renewal_;
};

// z on (x_b nodes) x (age levels). Levels live in a ring so a step is a relabeling.
// Values beyond a_hi(x_b) are kept as the continuation along characteristics and
// read back as zero through z().
class TransportState {
 public:
  explicit TransportState(std::shared_ptr<const TransportSetup> setup)
      : s_(std::move(setup)),
        n_(s_->grid().size()),
        L_(s_->ages().levels),
        rows_(L_, std::vector<double>(n_, 0.0)),
        slopes_(L_, std::vector<double>(n_, 0.0)) {}

  const TransportSetup& setup() const { return *s_; }
  std::shared_ptr<const TransportSetup> setup_ptr() const { return s_; }
  double t() const { return steps_ * s_->ages().da; }
  double dz() const { return s_->ages().da; }
  std::size_t steps() const { return steps_; }

  double z(std::size_t i, std::size_t k) const { return k < s_->ages().inside[i] ? raw(i, k) : 0.0; }
  double u(std::size_t i, std::size_t k) const { return z(i, k) * s_->phi()(i, k); }
  double raw(std::size_t i, std::size_t k) const { return rows_[(head_ + k) % L_][i]; }
  const std::vector<double>& row(std::size_t k) const { return rows_[(head_ + k) % L_]; }
  const std::vector<double>& row_slopes(std::size_t k) const { return slopes_[(head_ + k) % L_]; }

  // Monotone cubic interpolation of level k at size y (constant beyond the end nodes).
  double z_at(double y, std::size_t k) const {
    return pchip_eval(s_->grid().nodes(), row(k), row_slopes(k), y);
  }

  void set_raw(std::size_t i, std::size_t k, double value) { rows_[(head_ + k) % L_][i] = value; }
  void refresh_slopes() {
    for (std::size_t r = 0; r < L_; ++r) pchip_slopes(s_->grid().nodes(), rows_[r], slopes_[r]);
  }

  // One step of size da: shift along characteristics, then fill the first cell with the
  // births at the half step, when shifted row r sits at age r da.
  void step() {
    head_ = (head_ + L_ - 1) % L_;
    std::vector<double>& fresh = rows_[head_];
    const auto& ren = s_->renewal();
    parallel_for(n_, s_->threads(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double sum = 0.0;
        for (const auto& p : ren[i]) {
          const std::size_t r0 = (head_ + p.k) % L_, r1 = (head_ + p.k + 1) % L_;
          const double* y0 = rows_[r0].data();
          const double* d0 = slopes_[r0].data();
          const double* y1 = rows_[r1].data();
          const double* d1 = slopes_[r1].data();
          const std::size_t j = p.j;
          double v0 = p.h[0] * y0[j] + p.h[1] * y0[j + 1] + p.h[2] * d0[j] + p.h[3] * d0[j + 1];
          double v1 = p.h[0] * y1[j] + p.h[1] * y1[j + 1] + p.h[2] * d1[j] + p.h[3] * d1[j + 1];
          sum += p.weight * ((1.0 - p.frac) * v0 + p.frac * v1);
        }
        fresh[i] = std::max(0.0, sum);
      }
    });
    pchip_slopes(s_->grid().nodes(), fresh, slopes_[head_]);
    ++steps_;
  }

  // Sum over nodes of w_i times the midpoint rule in age of F(i, k, z).
  template <class F>
  double integrate(F&& f) const {
    const AgeGrid& ag = s_->ages();
    const auto& w = s_->grid().weights();
    std::vector<double> part(n_, 0.0);
    parallel_for(n_, s_->threads(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < ag.inside[i]; ++k) acc += ag.weight(i, k) * f(i, k, raw(i, k));
        part[i] = w[i] * acc;
      }
    });
    double s = 0.0;
    for (double p : part) s += p;
    return s;
  }

  double births() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += s_->grid().weights()[i] * raw(i, 0);
    return s;
  }

  // Weighted population: double integral of u = z Phi.
  double population() const {
    const Table2D& phi = s_->phi();
    return integrate([&](std::size_t i, std::size_t k, double z) { return z * phi(i, k); });
  }

  // Sum of z over every stored cell (exact bookkeeping for the shift).
  double stored_mass() const {
    double s = 0.0;
    for (std::size_t k = 0; k < L_; ++k) {
      const auto& r = row(k);
      for (std::size_t i = 0; i < n_; ++i) s += s_->grid().weights()[i] * r[i];
    }
    return s * dz();
  }

 private:
  std::shared_ptr<const TransportSetup> s_;
  std::size_t n_, L_;
  std::vector<std::vector<double>> rows_, slopes_;
  std::size_t head_ = 0;
  std::size_t steps_ = 0;
};

// State with z0 = u0 Psi; cells where the survival vanishes continue z0 geometrically.
inline TransportState init_state(const Table2D& u0, std::shared_ptr<const TransportSetup> setup) {
  TransportState st(setup);
  const auto& ag = setup->ages();
  const auto& phi = setup->phi();
  const std::size_t n = setup->grid().size();
  if (u0.n != n || u0.levels != ag.levels) throw InvalidInput("initial table does not match the grid");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t K = 0;  // cells with positive survival at their center
    for (std::size_t k = 0; k < ag.inside[i]; ++k) {
      double u = u0(i, k);
      if (!(u >= 0)) throw NegativeInput("initial density must be nonnegative");
      if (phi(i, k) > 0) {
        if (!std::isfinite(u / phi(i, k)))
          throw WeightDivergence("initial density too large where the survival function vanishes");
        st.set_raw(i, k, u / phi(i, k));
        K = k + 1;
      } else if (u > 0) {
        throw WeightDivergence("initial density has mass where the survival function vanishes");
      }
    }
    if (K == 0) continue;
    double last = st.raw(i, K - 1), prev = K >= 2 ? st.raw(i, K - 2) : last;
    double ratio = (prev > 0 && last > 0) ? std::clamp(last / prev, 0.0, 1.0) : 1.0;
    double val = last;
    for (std::size_t k = K; k < ag.levels; ++k) {
      val *= ratio;
      st.set_raw(i, k, val);
    }
  }
  st.refresh_slopes();
  return st;
}

// Tabulates a callable u0(x_b, a) on the state grid (zero beyond a_hi).
template <class F>
Table2D tabulate(const QuadratureGrid& grid, const AgeGrid& ag, F&& f) {
  Table2D t(grid.size(), ag.levels);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t k = 0; k < ag.inside[i]; ++k) t(i, k) = f(grid.nodes()[i], ag.age(k));
  return t;
}

struct EvolveReport {
  std::vector<double> t, births, population, conserved, aeg_l1, eigen_drift;
  double lambda = 0.0;
  double c0 = 0.0;  // conserved functional at t = 0
};

struct EvolveOptions {
  std::size_t record_every = 1;
  std::function<void(const TransportState&)> observer;  // called at each record
};

namespace detail {

inline void record(const TransportState& st, const SpectralSolution& sp, EvolveReport& rep) {
  const Table2D& phi = st.setup().phi();
  const Table2D& v = sp.v_full;
  const Table2D& f = sp.f_full;
  double decay = std::exp(-sp.lambda * st.t());
  double conserved = decay * st.integrate([&](std::size_t i, std::size_t k, double z) { return z * v(i, k); });
  if (rep.t.empty()) rep.c0 = conserved;
  double c0 = rep.c0;
  double d = st.integrate([&](std::size_t i, std::size_t k, double z) {
    return std::abs(decay * z * phi(i, k) / c0 - phi(i, k) * f(i, k));
  });
  double num = st.integrate([&](std::size_t i, std::size_t k, double z) { return std::abs(decay * z - c0 * f(i, k)); });
  double den = st.integrate([&](std::size_t i, std::size_t k, double) { return c0 * f(i, k); });
  rep.t.push_back(st.t());
  rep.births.push_back(st.births());
  rep.population.push_back(st.population());
  rep.conserved.push_back(conserved);
  rep.aeg_l1.push_back(d);
  rep.eigen_drift.push_back(den > 0 ? num / den : NAN);
}

}  // namespace detail

inline EvolveReport evolve(TransportState& st, double t_end, const SpectralSolution& sp,
                           const EvolveOptions& opt = {}) {
  if (sp.grid.size() != st.setup().grid().size() || sp.ages.levels != st.setup().ages().levels)
    throw InvalidInput("spectral solution grid differs from the transport grid");
  EvolveReport rep;
  rep.lambda = sp.lambda;
  std::size_t total = static_cast<std::size_t>(std::llround((t_end - st.t()) / st.dz()));
  std::size_t every = std::max<std::size_t>(1, opt.record_every);
  detail::record(st, sp, rep);
  if (opt.observer) opt.observer(st);
  for (std::size_t s = 1; s <= total; ++s) {
    st.step();
    if (s % every == 0 || s == total) {
      detail::record(st, sp, rep);
      if (opt.observer) opt.observer(st);
    }
  }
  return rep;
}

struct ChemostatReport {
  std::vector<double> t, births, population;
  double dilution = 0.0;
  double spread = 0.0;  // (max - min) / mean of the population over the last third
  bool steady = false;
};

inline ChemostatReport chemostat_rescale(const EvolveReport& rep, double D) {
  ChemostatReport out;
  out.dilution = D;
  out.t = rep.t;
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    double f = D == 0.0 ? 1.0 : std::exp(-D * rep.t[k]);
    out.births.push_back(rep.births[k] * f);
    out.population.push_back(rep.population[k] * f);
  }
  if (rep.t.empty()) return out;
  double t0 = rep.t.front() + (rep.t.back() - rep.t.front()) * 2.0 / 3.0;
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t k = 0; k < out.t.size(); ++k)
    if (out.t[k] >= t0) {
      lo = std::min(lo, out.population[k]);
      hi = std::max(hi, out.population[k]);
      sum += out.population[k];
      ++cnt;
    }
  double mean = cnt ? sum / cnt : 0.0;
  out.spread = mean > 0 ? (hi - lo) / mean : INFINITY;
  out.steady = out.spread < 0.01;
  return out;
}

// u at node-free initial size x_b and level k (monotone cubic in x_b).
inline double u_at(const TransportState& st, double x_b, std::size_t k) {
  const auto& m = st.setup().model();
  double a = st.setup().ages().age(k);
  if (x_b < m.x_lo() || x_b > m.x_hi() || a > m.a_hi(x_b)) return 0.0;
  return st.z_at(x_b, k) * m.phi(x_b, a);
}

// w(x, a_k) = u(pi_{-a} x, a) g(pi_{-a} x) / g(x); zero when pi_{-a} x leaves the window.
inline double w_at(const TransportState& st, double x, std::size_t k) {
  const auto& law = st.setup().law();
  const auto& m = st.setup().model();
  double a = st.setup().ages().age(k);
  auto xb = law.try_flow(law.checked(x), -a);
  if (!xb || *xb < m.x_lo() || *xb > m.x_hi()) return 0.0;
  return u_at(st, *xb, k) * law.g(*xb) / law.g(x);
}

struct SizeTable {
  std::vector<double> x;  // sizes on [x_lo, 2 x_hi]
  std::size_t levels = 0;
  std::vector<double> w;  // x-major
};

inline SizeTable age_size_transform(const TransportState& st, std::size_t nx = 256) {
  const auto& law = st.setup().law();
  SizeTable out;
  out.levels = st.setup().ages().levels;
  for (std::size_t j = 0; j < nx; ++j)
    out.x.push_back(law.domain_lo() + (law.domain_hi() - law.domain_lo()) * j / (nx - 1));
  out.w.assign(nx * out.levels, 0.0);
  parallel_for(nx, st.setup().threads(), [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j)
      for (std::size_t k = 0; k < out.levels; ++k) out.w[j * out.levels + k] = w_at(st, out.x[j], k);
  });
  return out;
}

struct ParadoxProbe {
  GrowthLaw law;
  int generation_bound;
};

// Homogeneous extension of a seed on [x_lo, 2 x_lo] and the bound floor(2 + log2(x_hi / x_lo)).
inline ParadoxProbe paradox_probe(GrowthSeed seed, double x_lo, double x_hi) {
  ParadoxProbe p{GrowthLaw::dyadic(std::move(seed), x_lo, x_hi), 0};
  p.generation_bound = static_cast<int>(std::floor(2.0 + std::log2(x_hi / x_lo)));
  return p;
}

inline double default_horizon(const CycleModel& model, double cycles = 20.0) {
  return cycles * model.mean_cycle(0.5 * (model.x_lo() + model.x_hi()));
}

}  // namespace cellcycle
