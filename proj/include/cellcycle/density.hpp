#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace cellcycle {

// One-dimensional probability density on a bounded interval with a tabulated CDF.
class Density1D {
 public:
  enum class Kind { uniform, truncated_normal, beta };

  static Density1D uniform(double lo, double hi) { return Density1D(Kind::uniform, lo, hi, 0, 1); }

  // Normal(mean, sigma) restricted to [lo, hi] and renormalized.
  static Density1D truncated_normal(double lo, double hi, double mean, double sigma) {
    if (!(sigma > 0)) throw InvalidInput("truncated_normal: sigma must be positive");
    return Density1D(Kind::truncated_normal, lo, hi, mean, sigma);
  }

  // Symmetric beta(s, s) rescaled to [lo, hi]; s > 1 gives a density vanishing at the edges.
  static Density1D beta(double lo, double hi, double shape) {
    if (!(shape >= 1)) throw InvalidInput("beta: shape must be >= 1");
    return Density1D(Kind::beta, lo, hi, 0, shape);
  }

  Kind kind() const { return t_->kind; }
  double lo() const { return t_->lo; }
  double hi() const { return t_->hi; }
  double param_a() const { return t_->p1; }
  double param_b() const { return t_->p2; }

  double pdf(double x) const {
    const Table& t = *t_;
    if (x < t.lo || x > t.hi) return 0.0;
    return raw(t, x) / t.norm;
  }

  double cdf(double x) const {
    const Table& t = *t_;
    if (x <= t.lo) return 0.0;
    if (x >= t.hi) return 1.0;
    double h = (t.hi - t.lo) / kCells;
    std::size_t k = std::min<std::size_t>(kCells - 1, static_cast<std::size_t>((x - t.lo) / h));
    double a = t.lo + k * h;
    double part = integrate([&](double s) { return raw(t, s); }, a, x, 1, 16) / t.norm;
    return std::min(1.0, t.cum[k] + part);
  }

  // Inverse CDF: monotone interpolation of the CDF table, then Newton steps kept inside the
  // table cell that brackets u.
  double quantile(double u) const {
    const Table& t = *t_;
    if (u <= 0.0) return t.lo;
    if (u >= 1.0) return t.hi;
    double h = (t.hi - t.lo) / kCells;
    auto it = std::upper_bound(t.cum.begin(), t.cum.end(), u);
    std::size_t k = std::min<std::size_t>(kCells - 1, static_cast<std::size_t>(it - t.cum.begin()) - 1);
    double a = t.lo + k * h, b = a + h;
    double x = std::clamp(t.inverse(u), a, b);
    for (int i = 0; i < 6; ++i) {
      double f = cdf(x) - u, d = pdf(x);
      if (f == 0.0) return x;
      if (f > 0) b = x; else a = x;
      double next = d > 0 ? x - f / d : 0.5 * (a + b);
      if (!(next >= a && next <= b)) next = 0.5 * (a + b);
      if (std::abs(next - x) <= 4e-16 * std::max(1.0, std::abs(x))) return next;
      x = next;
    }
    return x;
  }

  double mean() const { return t_->mean; }

  static constexpr std::size_t kCells = 1024;

 private:
  struct Table {
    Kind kind;
    double lo, hi, p1, p2;
    double norm = 1.0, mean = 0.0;
    std::vector<double> cum;  // cumulative mass at cell edges
    Pchip inverse;
  };

  static double raw(const Table& t, double x) {
    switch (t.kind) {
      case Kind::uniform:
        return 1.0;
      case Kind::truncated_normal: {
        double z = (x - t.p1) / t.p2;
        return std::exp(-0.5 * z * z);
      }
      case Kind::beta: {
        double u = (x - t.lo) / (t.hi - t.lo);
        if (u <= 0.0 || u >= 1.0) return t.p2 == 1.0 ? 1.0 : 0.0;
        return std::pow(u * (1.0 - u), t.p2 - 1.0);
      }
    }
    return 0.0;
  }

  Density1D(Kind kind, double lo, double hi, double p1, double p2) {
    if (!(lo < hi)) throw InvalidInput("density support must satisfy lo < hi");
    auto t = std::make_shared<Table>();
    t->kind = kind;
    t->lo = lo;
    t->hi = hi;
    t->p1 = p1;
    t->p2 = p2;
    double h = (hi - lo) / kCells;
    t->cum.assign(kCells + 1, 0.0);
    double m1 = 0.0;
    for (std::size_t k = 0; k < kCells; ++k) {
      double a = lo + k * h;
      t->cum[k + 1] = t->cum[k] + integrate([&](double s) { return raw(*t, s); }, a, a + h, 1, 16);
      m1 += integrate([&](double s) { return s * raw(*t, s); }, a, a + h, 1, 16);
    }
    t->norm = t->cum.back();
    t->mean = m1 / t->norm;
    for (double& c : t->cum) c /= t->norm;
    t->cum.back() = 1.0;
    std::vector<double> us, xs;
    us.reserve(kCells + 1);
    xs.reserve(kCells + 1);
    for (std::size_t k = 0; k <= kCells; ++k) {
      if (!us.empty() && t->cum[k] <= us.back()) continue;
      us.push_back(t->cum[k]);
      xs.push_back(lo + k * h);
    }
    t->inverse = Pchip(std::move(us), std::move(xs));
    t_ = std::move(t);
  }

  std::shared_ptr<const Table> t_;
};

}  // namespace cellcycle
