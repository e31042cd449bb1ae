#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cycle.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "numeric.hpp"
#include "validate.hpp"

namespace cellcycle {

// Composite Gauss-Legendre nodes and weights on [lo, hi].
class QuadratureGrid {
 public:
  QuadratureGrid() = default;

  static QuadratureGrid composite_gauss(double lo, double hi, int panels, int per_panel) {
    if (!(hi > lo) || panels < 1 || per_panel < 1) throw InvalidInput("quadrature grid: bad layout");
    QuadratureGrid q;
    q.lo_ = lo;
    q.hi_ = hi;
    q.panels_ = panels;
    q.per_panel_ = per_panel;
    const GaussRule& r = gauss_legendre(per_panel);
    double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      double mid = lo + (p + 0.5) * h;
      for (int k = 0; k < per_panel; ++k) {
        q.nodes_.push_back(mid + 0.5 * h * r.x[k]);
        q.weights_.push_back(0.5 * h * r.w[k]);
      }
    }
    q.bary_.resize(per_panel);
    for (int j = 0; j < per_panel; ++j) {
      double w = 1.0;
      for (int k = 0; k < per_panel; ++k)
        if (k != j) w *= (r.x[j] - r.x[k]);
      q.bary_[j] = 1.0 / w;
    }
    return q;
  }

  // n nodes: 32-point panels when n is a multiple of 32, 16-point panels for multiples of 16,
  // otherwise a single n-point rule.
  static QuadratureGrid with_size(double lo, double hi, int n) {
    if (n < 2) throw InvalidInput("quadrature grid needs at least 2 nodes");
    if (n % 32 == 0) return composite_gauss(lo, hi, n / 32, 32);
    if (n % 16 == 0) return composite_gauss(lo, hi, n / 16, 16);
    return composite_gauss(lo, hi, 1, n);
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double integrate(const std::vector<double>& values) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * values[i];
    return s;
  }

  // Panelwise barycentric Lagrange interpolation of nodal values.
  double interpolate(const std::vector<double>& values, double x) const {
    double h = (hi_ - lo_) / panels_;
    int p = static_cast<int>(std::floor((x - lo_) / h));
    p = std::clamp(p, 0, panels_ - 1);
    double t = (x - (lo_ + (p + 0.5) * h)) / (0.5 * h);
    const GaussRule& r = gauss_legendre(per_panel_);
    double num = 0.0, den = 0.0;
    for (int k = 0; k < per_panel_; ++k) {
      double d = t - r.x[k];
      if (d == 0.0) return values[p * per_panel_ + k];
      double c = bary_[k] / d;
      num += c * values[p * per_panel_ + k];
      den += c;
    }
    return num / den;
  }

 private:
  std::vector<double> nodes_, weights_, bary_;
  double lo_ = 0, hi_ = 1;
  int panels_ = 1, per_panel_ = 1;
};

struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  explicit Matrix(std::size_t n_ = 0) : n(n_), a(n_ * n_, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = &a[i * n];
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      out[i] = s;
    }
    return out;
  }
};

struct PowerResult {
  double radius = 0.0;
  std::vector<double> eigvec;
  int iterations = 0;
  bool converged = false;
};

// Perron pair of a nonnegative matrix; eigvec is sup-normalized.
inline PowerResult spectral_radius(const Matrix& m, std::vector<double> start = {},
                                   int max_iter = 100000) {
  PowerResult res;
  std::vector<double> v = start.size() == m.n ? std::move(start) : std::vector<double>(m.n, 1.0);
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  if (s == 0.0) v.assign(m.n, 1.0), s = 1.0;
  for (double& x : v) x /= s;
  double prev = NAN;
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<double> w = m.apply(v);
    double r = 0.0;
    for (double x : w) r = std::max(r, std::abs(x));
    res.iterations = it;
    if (r == 0.0) {
      res.radius = 0.0;
      res.eigvec = v;
      res.converged = true;
      return res;
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
      w[i] /= r;
      diff = std::max(diff, std::abs(w[i] - v[i]));
    }
    v = std::move(w);
    res.radius = r;
    if (it >= 3 && std::abs(r - prev) < 1e-12 * std::max(1.0, r) && diff < 1e-10) {
      res.converged = true;
      break;
    }
    prev = r;
  }
  res.eigvec = std::move(v);
  return res;
}

// Cached cycle ages a(y_j; x_i) and unweighted kernel factors 4 q(x_i, a) / g(2 y_j).
class RenewalKernels {
 public:
  RenewalKernels(const GrowthLaw& law, const CycleModel& model, QuadratureGrid grid, int threads = 1)
      : grid_(std::move(grid)), age_(grid_.size()), base_(grid_.size()) {
    require_core_assumptions(law, model);
    const std::size_t n = grid_.size();
    const auto& x = grid_.nodes();
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double a = cycle_age(law, x[j], x[i]);
          age_(i, j) = a;
          base_(i, j) = a > 0 ? 4.0 * model.q(x[i], a) / law.g(2.0 * x[j]) : 0.0;
        }
    });
    a_lo_min_ = INFINITY;
    for (double xi : x) a_lo_min_ = std::min(a_lo_min_, model.a_lo(xi));
    a_lo_min_ = std::min({a_lo_min_, model.a_lo(model.x_lo()), model.a_lo(model.x_hi())});
  }

  const QuadratureGrid& grid() const { return grid_; }
  const Matrix& ages() const { return age_; }
  double a_lo_min() const { return a_lo_min_; }

  Matrix K(double lambda) const {
    const std::size_t n = grid_.size();
    const auto& w = grid_.weights();
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double b = base_(i, j);
        if (b != 0.0) m(i, j) = b * std::exp(-lambda * age_(i, j)) * w[j];
      }
    return m;
  }

  // J has kernel j(x, y) = k_lambda(y, x).
  Matrix J(double lambda) const {
    const std::size_t n = grid_.size();
    const auto& w = grid_.weights();
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double b = base_(j, i);
        if (b != 0.0) m(i, j) = b * std::exp(-lambda * age_(j, i)) * w[j];
      }
    return m;
  }

 private:
  QuadratureGrid grid_;
  Matrix age_, base_;
  double a_lo_min_ = 0.0;
};

inline Matrix build_K(const GrowthLaw& law, const CycleModel& model, const QuadratureGrid& grid,
                      double lambda) {
  return RenewalKernels(law, model, grid).K(lambda);
}

inline Matrix build_J(const GrowthLaw& law, const CycleModel& model, const QuadratureGrid& grid,
                      double lambda) {
  return RenewalKernels(law, model, grid).J(lambda);
}

struct MalthusResult {
  double lambda = 0.0;
  std::vector<double> v_tilde;
  double r_K = 0.0;  // |r(K_lambda) - 1|
  std::vector<std::pair<double, double>> history;  // (lambda, r(K_lambda)) per bisection step
};

inline MalthusResult solve_malthus(const RenewalKernels& rk) {
  MalthusResult res;
  double lo = 0.0, hi = std::log(4.0) / rk.a_lo_min();
  auto r0 = spectral_radius(rk.K(lo));
  if (!(r0.radius > 1.0)) throw BracketFailure("r(K_0) = " + std::to_string(r0.radius) + " <= 1");
  res.history.emplace_back(lo, r0.radius);
  std::vector<double> v = r0.eigvec;
  double best_gap = INFINITY;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    auto r = spectral_radius(rk.K(mid), v);
    if (!r.converged) throw NoConvergence("power iteration stalled at lambda = " + std::to_string(mid));
    res.history.emplace_back(mid, r.radius);
    v = r.eigvec;
    double gap = std::abs(r.radius - 1.0);
    if (gap < best_gap) {
      best_gap = gap;
      res.lambda = mid;
      res.v_tilde = r.eigvec;
      res.r_K = gap;
    }
    if (gap < 1e-10 || hi - lo < 1e-12) break;
    if (r.radius > 1.0) lo = mid;
    else hi = mid;
  }
  return res;
}

inline MalthusResult solve_malthus(const GrowthLaw& law, const CycleModel& model, const QuadratureGrid& grid) {
  return solve_malthus(RenewalKernels(law, model, grid));
}

struct BirthProfile {
  std::vector<double> f_tilde;  // integrates to 1 under the grid weights
  double radius = 0.0;
  double residual = 0.0;  // ||J f - f||_inf / ||f||_inf
};

inline BirthProfile stationary_birth_profile(const RenewalKernels& rk, double lambda) {
  Matrix j = rk.J(lambda);
  auto r = spectral_radius(j);
  if (!r.converged) throw NoConvergence("power iteration for J did not converge");
  BirthProfile out;
  out.radius = r.radius;
  double mass = rk.grid().integrate(r.eigvec);
  out.f_tilde = r.eigvec;
  for (double& x : out.f_tilde) x /= mass;
  auto jf = j.apply(out.f_tilde);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < jf.size(); ++i) {
    num = std::max(num, std::abs(jf[i] - out.f_tilde[i]));
    den = std::max(den, std::abs(out.f_tilde[i]));
  }
  out.residual = num / den;
  return out;
}

inline BirthProfile stationary_birth_profile(const GrowthLaw& law, const CycleModel& model,
                                             const QuadratureGrid& grid, double lambda) {
  return stationary_birth_profile(RenewalKernels(law, model, grid), lambda);
}

// Age cells [k da, (k+1) da) on [0, max a_hi], represented by their centers.
struct AgeGrid {
  std::size_t levels = 0;
  double da = 0.0;
  std::vector<double> a_hi;            // per node
  std::vector<std::size_t> inside;     // number of cells starting below a_hi(x_i)

  static AgeGrid build(const CycleModel& model, const QuadratureGrid& grid, std::size_t levels) {
    if (levels < 4) throw InvalidInput("age grid needs at least 4 levels");
    AgeGrid ag;
    ag.levels = levels;
    double amax = 0.0;
    for (double x : grid.nodes()) {
      ag.a_hi.push_back(model.a_hi(x));
      amax = std::max(amax, ag.a_hi.back());
    }
    ag.da = amax / levels;
    for (double ah : ag.a_hi) {
      auto K = static_cast<std::size_t>(std::ceil(ah / ag.da * (1 - 1e-14)));
      ag.inside.push_back(std::clamp<std::size_t>(K, 1, levels));
    }
    return ag;
  }

  double age(std::size_t k) const { return (k + 0.5) * da; }

  // Length of cell k clipped to [0, a_hi(x_i)].
  double weight(std::size_t i, std::size_t k) const {
    std::size_t K = inside[i];
    if (k + 1 < K) return da;
    if (k + 1 == K) return a_hi[i] - k * da;
    return 0.0;
  }

  // Midpoint rule over the cells of node i.
  double integrate_node(const double* vals, std::size_t i, std::size_t stride = 1) const {
    double s = 0.0;
    for (std::size_t k = 0; k < inside[i]; ++k) s += weight(i, k) * vals[k * stride];
    return s;
  }
};

// Values on (x_b nodes) x (age levels), stored node-major.
struct Table2D {
  std::size_t n = 0, levels = 0;
  std::vector<double> v;

  Table2D() = default;
  Table2D(std::size_t n_, std::size_t levels_) : n(n_), levels(levels_), v(n_ * levels_, 0.0) {}
  double& operator()(std::size_t i, std::size_t k) { return v[i * levels + k]; }
  double operator()(std::size_t i, std::size_t k) const { return v[i * levels + k]; }
  const double* node(std::size_t i) const { return &v[i * levels]; }
};

// Double integral over X of a node-major table.
inline double integrate_2d(const Table2D& t, const QuadratureGrid& grid, const AgeGrid& ag) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.n; ++i) s += grid.weights()[i] * ag.integrate_node(t.node(i), i);
  return s;
}

struct DualEigenfunction {
  Table2D v;
  double c1 = 0.0, c2 = 0.0;  // empirical bounds c1 Phi <= v <= c2 Phi
};

inline DualEigenfunction dual_eigenfunction(const GrowthLaw& law, const CycleModel& model,
                                            const QuadratureGrid& grid, const AgeGrid& ag, double lambda,
                                            const std::vector<double>& v_tilde, int threads = 1) {
  const std::size_t n = grid.size();
  DualEigenfunction out{Table2D(n, ag.levels), INFINITY, 0.0};
  const GaussRule& r8 = gauss_legendre(8);
  std::vector<double> lo_ratio(n, INFINITY), hi_ratio(n, 0.0);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double x = grid.nodes()[i];
      double alo = model.a_lo(x), ahi = model.a_hi(x);
      auto F = [&](double s) {
        double y = 0.5 * law.try_flow(x, s).value_or(2.0 * model.x_hi());
        y = std::clamp(y, model.x_lo(), model.x_hi());
        return 2.0 * model.q(x, s) * grid.interpolate(v_tilde, y) * std::exp(-lambda * s);
      };
      auto piece = [&](double a, double c) {
        a = std::max(a, alo);
        c = std::min(c, ahi);
        if (!(c > a)) return 0.0;
        double mid = 0.5 * (a + c), half = 0.5 * (c - a), sum = 0.0;
        for (int k = 0; k < 8; ++k) sum += r8.w[k] * F(mid + half * r8.x[k]);
        return sum * half;
      };
      std::size_t K = ag.inside[i];
      double G = 0.0;
      for (std::size_t k = K; k-- > 0;) {
        G += piece(ag.age(k), k + 1 == K ? ahi : ag.age(k + 1));
        out.v(i, k) = std::exp(lambda * ag.age(k)) * G;
      }
      for (std::size_t k = 0; k < K; ++k) {
        double phi = model.phi(x, ag.age(k));
        if (phi > 1e-8) {
          double ratio = out.v(i, k) / phi;
          lo_ratio[i] = std::min(lo_ratio[i], ratio);
          hi_ratio[i] = std::max(hi_ratio[i], ratio);
        }
      }
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.c1 = std::min(out.c1, lo_ratio[i]);
    out.c2 = std::max(out.c2, hi_ratio[i]);
  }
  return out;
}

// f_i(x_b, a) = e^{-lambda a} f_tilde(x_b), scaled so that the double integral of f_i v is 1.
inline Table2D stable_distribution(const std::vector<double>& f_tilde, double lambda, const QuadratureGrid& grid,
                                   const AgeGrid& ag, const Table2D& v, double* scale_out = nullptr) {
  const std::size_t n = grid.size();
  Table2D f(n, ag.levels), prod(n, ag.levels);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < ag.inside[i]; ++k) {
      f(i, k) = std::exp(-lambda * ag.age(k)) * f_tilde[i];
      prod(i, k) = f(i, k) * v(i, k);
    }
  double c = 1.0 / integrate_2d(prod, grid, ag);
  for (double& x : f.v) x *= c;
  if (scale_out) *scale_out = c;
  return f;
}

// alpha(u0) = double integral of u0 Psi v.
inline double aeg_functional(const Table2D& u0, const Table2D& v, const CycleModel& model,
                             const QuadratureGrid& grid, const AgeGrid& ag) {
  Table2D prod(grid.size(), ag.levels);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = grid.nodes()[i];
    for (std::size_t k = 0; k < ag.inside[i]; ++k) {
      double u = u0(i, k);
      if (u < 0) throw NegativeInput("initial density must be nonnegative");
      if (u == 0.0) continue;
      double phi = model.phi(x, ag.age(k));
      if (!(phi > 0) || !std::isfinite(u / phi))
        throw WeightDivergence("initial density has mass where the survival function vanishes");
      prod(i, k) = u / phi * v(i, k);
    }
  }
  return integrate_2d(prod, grid, ag);
}

struct SpectralSolution {
  double lambda = 0.0;
  QuadratureGrid grid;
  AgeGrid ages;
  std::vector<double> v_tilde, f_tilde;
  Table2D v_full, f_full;
  double r_K = 0.0, r_J = 0.0, adjoint_gap = 0.0, f_residual = 0.0;
  double c1 = 0.0, c2 = 0.0;
  std::vector<std::pair<double, double>> history;
};

// Worst |<g, J f> - <K g, f>| / (|f| |g|) over random nonnegative pairs (weighted inner product).
inline double adjoint_gap(const Matrix& j, const Matrix& k, const QuadratureGrid& grid, int pairs,
                          std::uint64_t seed) {
  const std::size_t n = grid.size();
  const auto& w = grid.weights();
  Stream rng(seed);
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    std::vector<double> f(n), g(n);
    for (auto& x : f) x = rng.uniform();
    for (auto& x : g) x = rng.uniform();
    auto jf = j.apply(f), kg = k.apply(g);
    double lhs = 0, rhs = 0, nf = 0, ng = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lhs += w[i] * g[i] * jf[i];
      rhs += w[i] * kg[i] * f[i];
      nf += w[i] * f[i] * f[i];
      ng += w[i] * g[i] * g[i];
    }
    worst = std::max(worst, std::abs(lhs - rhs) / std::sqrt(nf * ng));
  }
  return worst;
}

inline SpectralSolution solve_spectral(const GrowthLaw& law, const CycleModel& model, int nodes = 256,
                                       std::size_t levels = 512, int threads = 1) {
  SpectralSolution s;
  RenewalKernels rk(law, model, QuadratureGrid::with_size(model.x_lo(), model.x_hi(), nodes), threads);
  s.grid = rk.grid();
  auto m = solve_malthus(rk);
  s.lambda = m.lambda;
  s.v_tilde = m.v_tilde;
  s.r_K = m.r_K;
  s.history = m.history;
  auto bp = stationary_birth_profile(rk, s.lambda);
  s.f_tilde = bp.f_tilde;
  s.r_J = std::abs(bp.radius - 1.0);
  s.f_residual = bp.residual;
  s.adjoint_gap = adjoint_gap(rk.J(s.lambda), rk.K(s.lambda), s.grid, 100, 0x5eed);
  s.ages = AgeGrid::build(model, s.grid, levels);
  auto dual = dual_eigenfunction(law, model, s.grid, s.ages, s.lambda, s.v_tilde, threads);
  s.v_full = std::move(dual.v);
  s.c1 = dual.c1;
  s.c2 = dual.c2;
  s.f_full = stable_distribution(s.f_tilde, s.lambda, s.grid, s.ages, s.v_full);
  return s;
}

}  // namespace cellcycle
