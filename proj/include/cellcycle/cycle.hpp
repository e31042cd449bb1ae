#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "density.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "numeric.hpp"

namespace cellcycle {

class CycleModel {
 public:
  enum class Kind { tabulated, constant_delta, target_size, delayed };

  // Division once the added size Delta ~ h is reached under g = kappa x.
  static CycleModel constant_delta(double kappa, Density1D h, double x_lo, double x_hi) {
    if (!(kappa > 0)) throw InvalidInput("constant_delta: kappa must be positive");
    if (!(h.lo() >= 0)) throw InvalidInput("constant_delta: Delta support must be nonnegative");
    return CycleModel(ConstantDelta{kappa, std::move(h)}, x_lo, x_hi);
  }

  // Division attempted at target size f(x_b) = 2 x_b^(1-alpha) x0^alpha, delayed by xi ~ h.
  static CycleModel target_size(double alpha, double x0, Density1D xi, GrowthLaw law) {
    if (!(alpha >= 0 && alpha <= 1)) throw InvalidInput("target_size: alpha must lie in [0, 1]");
    if (!(x0 > 0)) throw InvalidInput("target_size: x0 must be positive");
    double lo = law.x_lo(), hi = law.x_hi();
    return CycleModel(TargetSize{alpha, x0, std::move(xi), std::move(law)}, lo, hi);
  }

  // q sampled on a rectangular grid (row-major in x_b); rows renormalized to unit mass.
  static CycleModel tabulated(std::vector<double> xb, std::vector<double> a, std::vector<double> q) {
    if (xb.size() < 2 || a.size() < 2 || q.size() != xb.size() * a.size())
      throw InvalidInput("tabulated q: grid must be rectangular with >= 2 nodes per axis");
    for (std::size_t k = 1; k < xb.size(); ++k)
      if (!(xb[k] > xb[k - 1])) throw InvalidInput("tabulated q: x_b must increase");
    for (std::size_t k = 1; k < a.size(); ++k)
      if (!(a[k] > a[k - 1])) throw InvalidInput("tabulated q: a must increase");
    if (!(a.front() >= 0)) throw InvalidInput("tabulated q: ages must be nonnegative");
    Tabulated t;
    t.xb = std::move(xb);
    t.a = std::move(a);
    t.q = std::move(q);
    const std::size_t na = t.a.size();
    t.cum.assign(t.q.size(), 0.0);
    for (std::size_t i = 0; i < t.xb.size(); ++i) {
      double* row = &t.q[i * na];
      for (std::size_t j = 0; j < na; ++j)
        if (!(row[j] >= 0)) throw InvalidInput("tabulated q: negative or non-finite entry");
      double mass = 0.0;
      for (std::size_t j = 0; j + 1 < na; ++j) mass += 0.5 * (row[j] + row[j + 1]) * (t.a[j + 1] - t.a[j]);
      if (!(mass > 0)) throw InvalidInput("tabulated q: row with zero mass");
      t.max_renorm = std::max(t.max_renorm, std::abs(mass - 1.0));
      for (std::size_t j = 0; j < na; ++j) row[j] /= mass;
      double* c = &t.cum[i * na];
      for (std::size_t j = 0; j + 1 < na; ++j)
        c[j + 1] = c[j] + 0.5 * (row[j] + row[j + 1]) * (t.a[j + 1] - t.a[j]);
    }
    double lo = t.xb.front(), hi = t.xb.back();
    return CycleModel(std::move(t), lo, hi);
  }

  // q2(x_b, a) = q1(pi_rho x_b, a - rho): a maturation phase of length rho precedes the base cycle.
  static CycleModel delayed(CycleModel base, double rho, GrowthLaw law, double x_lo, double x_hi) {
    if (!(rho >= 0)) throw InvalidInput("delayed: rho must be nonnegative");
    return CycleModel(Delayed{std::make_shared<CycleModel>(std::move(base)), rho, std::move(law)}, x_lo, x_hi);
  }

  Kind kind() const { return static_cast<Kind>(d_->v.index()); }
  double x_lo() const { return d_->x_lo; }
  double x_hi() const { return d_->x_hi; }

  // Largest relative renormalization applied to tabulated rows (0 otherwise).
  double renormalization() const {
    if (auto* t = std::get_if<Tabulated>(&d_->v)) return t->max_renorm;
    return 0.0;
  }

  double window_check(double x_b) const {
    double tol = 1e-9 * d_->x_hi;
    if (!(x_b >= d_->x_lo - tol && x_b <= d_->x_hi + tol))
      throw OutOfWindow("initial size " + std::to_string(x_b) + " outside [" + std::to_string(d_->x_lo) +
                        ", " + std::to_string(d_->x_hi) + "]");
    return std::clamp(x_b, d_->x_lo, d_->x_hi);
  }

  double a_lo(double x_b) const { return bounds(window_check(x_b)).first; }
  double a_hi(double x_b) const { return bounds(window_check(x_b)).second; }

  double q(double x_b, double a) const { return q_raw(window_check(x_b), a); }

  double cdf(double x_b, double a) const { return cdf_raw(window_check(x_b), a); }

  double phi(double x_b, double a) const { return 1.0 - cdf(x_b, a); }

  double psi(double x_b, double a) const {
    double p = phi(x_b, a);
    if (p < 1e-300) throw SurvivalZero("survival vanishes at a = " + std::to_string(a));
    return 1.0 / p;
  }

  double hazard(double x_b, double a) const {
    double qq = q(x_b, a);
    if (qq == 0.0 && a < a_lo(x_b)) return 0.0;
    double p = phi(x_b, a);
    if (p < 1e-300) throw SurvivalZero("hazard undefined at a = " + std::to_string(a));
    return qq / p;
  }

  // Inverse CDF of the cycle length for u in (0, 1).
  double sample_tau(double x_b, double u) const {
    x_b = window_check(x_b);
    auto [lo, hi] = bounds(x_b);
    double t = std::visit([&](const auto& m) { return sample_impl(m, x_b, u); }, d_->v);
    return std::clamp(t, lo, hi);
  }

  double mean_cycle(double x_b) const {
    x_b = window_check(x_b);
    auto [lo, hi] = bounds(x_b);
    return lo + integrate([&](double a) { return 1.0 - cdf_raw(x_b, a); }, lo, hi, 8, 32);
  }

  const Density1D* base_density() const {
    if (auto* c = std::get_if<ConstantDelta>(&d_->v)) return &c->h;
    if (auto* t = std::get_if<TargetSize>(&d_->v)) return &t->xi;
    return nullptr;
  }

  double target_tau0(double x_b) const {
    auto* t = std::get_if<TargetSize>(&d_->v);
    if (!t) throw InvalidInput("target_tau0 requires a target_size model");
    return tau0(*t, window_check(x_b));
  }

 private:
  struct ConstantDelta {
    double kappa;
    Density1D h;
  };
  struct TargetSize {
    double alpha, x0;
    Density1D xi;
    GrowthLaw law;
  };
  struct Tabulated {
    std::vector<double> xb, a, q, cum;
    double max_renorm = 0.0;
  };
  struct Delayed {
    std::shared_ptr<const CycleModel> base;
    double rho;
    GrowthLaw law;
  };
  using Variant = std::variant<Tabulated, ConstantDelta, TargetSize, Delayed>;
  struct Data {
    Variant v;
    double x_lo, x_hi;
  };

  CycleModel(Variant v, double x_lo, double x_hi) {
    if (!(x_lo > 0) || !(x_hi > x_lo)) throw InvalidInput("cycle window needs 0 < x_lo < x_hi");
    d_ = std::make_shared<Data>(Data{std::move(v), x_lo, x_hi});
  }

  static double tau0(const TargetSize& t, double x_b) {
    double f = 2.0 * std::pow(x_b, 1.0 - t.alpha) * std::pow(t.x0, t.alpha);
    return t.law.time_between(x_b, f);
  }

  // Tabulated helpers: cell index and weight in x_b.
  static std::pair<std::size_t, double> xcell(const Tabulated& t, double x_b) {
    std::size_t i = locate(t.xb, x_b);
    double w = (x_b - t.xb[i]) / (t.xb[i + 1] - t.xb[i]);
    return {i, std::clamp(w, 0.0, 1.0)};
  }
  static double row_q(const Tabulated& t, std::size_t i, double a) {
    const std::size_t na = t.a.size();
    if (a <= t.a.front() || a >= t.a.back()) return 0.0;
    std::size_t j = locate(t.a, a);
    double s = (a - t.a[j]) / (t.a[j + 1] - t.a[j]);
    return (1 - s) * t.q[i * na + j] + s * t.q[i * na + j + 1];
  }
  static double row_cdf(const Tabulated& t, std::size_t i, double a) {
    const std::size_t na = t.a.size();
    if (a <= t.a.front()) return 0.0;
    if (a >= t.a.back()) return 1.0;
    std::size_t j = locate(t.a, a);
    double h = t.a[j + 1] - t.a[j], s = a - t.a[j];
    double q0 = t.q[i * na + j], q1 = t.q[i * na + j + 1];
    return std::min(1.0, t.cum[i * na + j] + q0 * s + 0.5 * (q1 - q0) / h * s * s);
  }
  static std::pair<double, double> row_support(const Tabulated& t, std::size_t i) {
    const std::size_t na = t.a.size();
    std::size_t j0 = 0, j1 = na - 1;
    while (j0 + 1 < na && t.q[i * na + j0 + 1] == 0.0) ++j0;
    while (j1 > 0 && t.q[i * na + j1 - 1] == 0.0) --j1;
    return {t.a[j0], t.a[j1]};
  }

  std::pair<double, double> bounds(double x_b) const {
    return std::visit([&](const auto& m) { return bounds_impl(m, x_b); }, d_->v);
  }
  static std::pair<double, double> bounds_impl(const ConstantDelta& m, double x_b) {
    return {std::log1p(m.h.lo() / x_b) / m.kappa, std::log1p(m.h.hi() / x_b) / m.kappa};
  }
  static std::pair<double, double> bounds_impl(const TargetSize& m, double x_b) {
    double t0 = tau0(m, x_b);
    return {t0 + m.xi.lo(), t0 + m.xi.hi()};
  }
  static std::pair<double, double> bounds_impl(const Tabulated& m, double x_b) {
    auto [i, w] = xcell(m, x_b);
    auto s0 = row_support(m, i), s1 = row_support(m, i + 1);
    if (w == 0.0) return s0;
    if (w == 1.0) return s1;
    return {std::min(s0.first, s1.first), std::max(s0.second, s1.second)};
  }
  static std::pair<double, double> bounds_impl(const Delayed& m, double x_b) {
    double y = m.law.flow(x_b, m.rho);
    return {m.rho + m.base->a_lo(y), m.rho + m.base->a_hi(y)};
  }

  double q_raw(double x_b, double a) const {
    return std::visit([&](const auto& m) { return q_impl(m, x_b, a); }, d_->v);
  }
  static double q_impl(const ConstantDelta& m, double x_b, double a) {
    if (!(a > 0)) return 0.0;
    double delta = x_b * std::expm1(m.kappa * a);
    return m.kappa * x_b * std::exp(m.kappa * a) * m.h.pdf(delta);
  }
  static double q_impl(const TargetSize& m, double x_b, double a) {
    return m.xi.pdf(a - tau0(m, x_b));
  }
  static double q_impl(const Tabulated& m, double x_b, double a) {
    auto [i, w] = xcell(m, x_b);
    return (1 - w) * row_q(m, i, a) + w * row_q(m, i + 1, a);
  }
  static double q_impl(const Delayed& m, double x_b, double a) {
    if (a <= m.rho) return 0.0;
    return m.base->q(m.law.flow(x_b, m.rho), a - m.rho);
  }

  double cdf_raw(double x_b, double a) const {
    return std::visit([&](const auto& m) { return cdf_impl(m, x_b, a); }, d_->v);
  }
  static double cdf_impl(const ConstantDelta& m, double x_b, double a) {
    if (!(a > 0)) return 0.0;
    return m.h.cdf(x_b * std::expm1(m.kappa * a));
  }
  static double cdf_impl(const TargetSize& m, double x_b, double a) {
    return m.xi.cdf(a - tau0(m, x_b));
  }
  static double cdf_impl(const Tabulated& m, double x_b, double a) {
    auto [i, w] = xcell(m, x_b);
    return (1 - w) * row_cdf(m, i, a) + w * row_cdf(m, i + 1, a);
  }
  static double cdf_impl(const Delayed& m, double x_b, double a) {
    if (a <= m.rho) return 0.0;
    return m.base->cdf(m.law.flow(x_b, m.rho), a - m.rho);
  }

  static double sample_impl(const ConstantDelta& m, double x_b, double u) {
    return std::log1p(m.h.quantile(u) / x_b) / m.kappa;
  }
  static double sample_impl(const TargetSize& m, double x_b, double u) {
    return tau0(m, x_b) + m.xi.quantile(u);
  }
  static double sample_impl(const Tabulated& m, double x_b, double u) {
    auto [i, w] = xcell(m, x_b);
    const std::size_t na = m.a.size();
    auto F = [&](std::size_t j) { return (1 - w) * m.cum[i * na + j] + w * m.cum[(i + 1) * na + j]; };
    auto Q = [&](std::size_t j) { return (1 - w) * m.q[i * na + j] + w * m.q[(i + 1) * na + j]; };
    std::size_t lo = 0, hi = na - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (F(mid) <= u) lo = mid;
      else hi = mid;
    }
    double h = m.a[lo + 1] - m.a[lo], r = u - F(lo), q0 = Q(lo), c2 = 0.5 * (Q(lo + 1) - q0) / h;
    double disc = std::max(0.0, q0 * q0 + 4.0 * c2 * r);
    double s = (q0 + std::sqrt(disc)) > 0 ? 2.0 * r / (q0 + std::sqrt(disc)) : 0.0;
    return m.a[lo] + std::clamp(s, 0.0, h);
  }
  static double sample_impl(const Delayed& m, double x_b, double u) {
    return m.rho + m.base->sample_tau(m.law.flow(x_b, m.rho), u);
  }

  std::shared_ptr<const Data> d_;
};

// Conditional density k(r | x_b) of the growth rate: base density shifted by slope (x_b - x_ref).
class GrowthRateDistribution {
 public:
  GrowthRateDistribution(Density1D base, double slope = 0.0, double x_ref = 0.0)
      : base_(std::move(base)), slope_(slope), x_ref_(x_ref) {
    if (slope_ == 0.0 && !(base_.lo() > 0)) throw InvalidInput("growth rate support must be positive");
  }
  double shift(double x_b) const { return slope_ * (x_b - x_ref_); }
  double density(double r, double x_b) const { return base_.pdf(r - shift(x_b)); }
  double sample(double x_b, double u) const { return base_.quantile(u) + shift(x_b); }
  double lo(double x_b) const { return base_.lo() + shift(x_b); }
  double hi(double x_b) const { return base_.hi() + shift(x_b); }
  double mean(double x_b) const { return base_.mean() + shift(x_b); }

 private:
  Density1D base_;
  double slope_, x_ref_;
};

// Density of x_b e^{kappa a} in x when kappa ~ k(. | x_b).
inline double growth_rate_birth_density(const GrowthRateDistribution& dist, double x, double x_b,
                                        double a) {
  if (!(x > 0 && x_b > 0 && a > 0)) return 0.0;
  return dist.density(std::log(x / x_b) / a, x_b) / (a * x);
}

// Values on increasing nodes, read back by monotone cubic interpolation; zero outside.
struct GridFunction {
  std::vector<double> x, y;

  double operator()(double t) const {
    if (x.empty() || t < x.front() || t > x.back()) return 0.0;
    std::vector<double> d(x.size());
    pchip_slopes(x, y, d);
    return pchip_eval(x, y, d, t);
  }
};

// Ages over which some initial size can divide: (min a_lo, max a_hi) on the window.
inline std::pair<double, double> global_age_range(const CycleModel& model, int samples = 257) {
  double lo = INFINITY, hi = 0.0;
  for (int k = 0; k < samples; ++k) {
    double x = model.x_lo() + (model.x_hi() - model.x_lo()) * k / (samples - 1);
    lo = std::min(lo, model.a_lo(x));
    hi = std::max(hi, model.a_hi(x));
  }
  return {lo, hi};
}

// Frobenius-Perron image of a density of mother initial sizes after an age-a division.
inline GridFunction perron_apply(const GrowthLaw& law, const CycleModel& model, const GridFunction& f,
                                 double a) {
  auto [alo, ahi] = global_age_range(model);
  if (!(a > alo && a < ahi))
    throw BadAge("P_a vanishes identically for a = " + std::to_string(a) + " outside (" +
                 std::to_string(alo) + ", " + std::to_string(ahi) + ")");
  for (double v : f.y)
    if (v < 0) throw NegativeInput("perron_apply needs a nonnegative density");
  double xa = min_split_size(law, a);
  double start = 0.5 * law.flow(xa, a);
  std::vector<double> d(f.x.size());
  pchip_slopes(f.x, f.y, d);
  GridFunction out{f.x, std::vector<double>(f.x.size(), 0.0)};
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    double xb = f.x[i];
    if (xb < start - 1e-12 * law.x_hi()) continue;
    auto y = law.try_flow(2.0 * xb, -a);
    if (!y || *y < f.x.front() || *y > f.x.back()) continue;
    out.y[i] = 2.0 * law.g(*y) / law.g(2.0 * xb) * pchip_eval(f.x, f.y, d, *y);
  }
  return out;
}

}  // namespace cellcycle
