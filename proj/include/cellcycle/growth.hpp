#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace cellcycle {

// Growth field on one octave [x_lo, 2 x_lo], extended by g(x) = 2^n g(2^-n x).
struct GrowthSeed {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> dg;

  // g(x) = kappa x (1 + amplitude sin(2 pi log2(x / x_lo))).
  static GrowthSeed log_periodic(double kappa, double amplitude, double x_lo) {
    const double w = 2.0 * std::numbers::pi / std::numbers::ln2;
    GrowthSeed s;
    s.name = "log_periodic";
    s.g = [=](double x) { return kappa * x * (1.0 + amplitude * std::sin(w * std::log(x / x_lo))); };
    s.dg = [=](double x) {
      double th = w * std::log(x / x_lo);
      return kappa * (1.0 + amplitude * std::sin(th)) + kappa * amplitude * w * std::cos(th);
    };
    return s;
  }
};

class GrowthLaw {
 public:
  enum class Kind { exponential, affine, tabulated, dyadic };

  static GrowthLaw exponential(double kappa, double x_lo, double x_hi) {
    if (!(kappa > 0)) throw NonPositiveG("exponential growth needs kappa > 0");
    auto d = base(Kind::exponential, x_lo, x_hi);
    d->kappa = kappa;
    return GrowthLaw(std::move(d));
  }

  // g(x) = kappa x + beta.
  static GrowthLaw affine(double kappa, double beta, double x_lo, double x_hi) {
    if (!(kappa >= 0) || !(beta >= 0) || !(kappa * x_lo + beta > 0))
      throw NonPositiveG("affine growth needs kappa >= 0, beta >= 0 and g > 0");
    auto d = base(Kind::affine, x_lo, x_hi);
    d->kappa = kappa;
    d->beta = beta;
    return GrowthLaw(std::move(d));
  }

  // Samples of g covering [x_lo, 2 x_hi], interpolated by monotone cubics.
  static GrowthLaw tabulated(std::vector<double> xs, std::vector<double> gs, double x_lo,
                             double x_hi) {
    auto d = base(Kind::tabulated, x_lo, x_hi);
    if (xs.size() != gs.size() || xs.size() < 2)
      throw InvalidInput("tabulated growth: need matching x and g columns (>= 2 rows)");
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (!(gs[k] > 0)) throw NonPositiveG("tabulated growth: g <= 0 at x = " + std::to_string(xs[k]));
      if (k > 0 && !(xs[k] > xs[k - 1])) throw InvalidInput("tabulated growth: x must increase");
    }
    double tol = 1e-9 * x_hi;
    if (xs.front() > x_lo + tol || xs.back() < 2 * x_hi - tol)
      throw InvalidInput("tabulated growth: samples must cover [x_lo, 2 x_hi]");
    d->table = Pchip(std::move(xs), std::move(gs));
    const auto& x = d->table.x();
    d->t_nodes.assign(x.size(), 0.0);
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
      d->t_nodes[k + 1] = d->t_nodes[k] + integrate([&](double r) { return 1.0 / d->table(r); },
                                                    x[k], x[k + 1], 1, 32);
    d->t_shift = d->time_tab(x_lo);
    return GrowthLaw(std::move(d));
  }

  static GrowthLaw dyadic(GrowthSeed seed, double x_lo, double x_hi) {
    auto d = base(Kind::dyadic, x_lo, x_hi);
    double scale = std::abs(seed.g(x_lo)) + std::abs(seed.g(2 * x_lo));
    for (int k = 0; k <= 64; ++k) {
      double x = x_lo * (1.0 + k / 64.0);
      if (!(seed.g(x) > 0)) throw NonPositiveG("dyadic seed: g <= 0 at x = " + std::to_string(x));
    }
    double gap = std::abs(seed.g(2 * x_lo) - 2 * seed.g(x_lo));
    double dgap = std::abs(seed.dg(2 * x_lo) - seed.dg(x_lo));
    if (gap > 1e-10 * scale || dgap > 1e-10 * (std::abs(seed.dg(x_lo)) + 1.0))
      throw SeedMismatch("dyadic seed must satisfy g(2x)=2g(x) and g'(2x)=g'(x) at x_lo");
    d->seed = std::move(seed);
    const std::size_t cells = 64;
    d->oct_nodes.assign(cells + 1, 0.0);
    for (std::size_t k = 0; k < cells; ++k) {
      double a = x_lo * (1.0 + double(k) / cells), b = x_lo * (1.0 + double(k + 1) / cells);
      d->oct_nodes[k + 1] = d->oct_nodes[k] + integrate([&](double r) { return 1.0 / d->seed.g(r); }, a, b, 1, 32);
    }
    d->t_oct = d->oct_nodes.back();
    return GrowthLaw(std::move(d));
  }

  Kind kind() const { return d_->kind; }
  double x_lo() const { return d_->x_lo; }
  double x_hi() const { return d_->x_hi; }
  double domain_lo() const { return d_->x_lo; }
  double domain_hi() const { return 2.0 * d_->x_hi; }
  double kappa() const { return d_->kappa; }
  double beta() const { return d_->beta; }
  const GrowthSeed* seed() const { return d_->kind == Kind::dyadic ? &d_->seed : nullptr; }
  double octave_time() const { return d_->t_oct; }

  // Size clamped onto the domain, or DomainExit when off by more than 1e-9 x_hi.
  double checked(double x) const {
    double tol = 1e-9 * d_->x_hi;
    if (!(x >= domain_lo() - tol && x <= domain_hi() + tol))
      throw DomainExit("size " + std::to_string(x) + " outside [" + std::to_string(domain_lo()) +
                       ", " + std::to_string(domain_hi()) + "]");
    return std::clamp(x, domain_lo(), domain_hi());
  }

  bool inside(double x) const {
    double tol = 1e-9 * d_->x_hi;
    return x >= domain_lo() - tol && x <= domain_hi() + tol;
  }

  double g(double x) const { return g_raw(checked(x)); }

  // g for SDE drift: closed-form laws extend past the domain, the others stay checked.
  double drift(double x) const {
    if (d_->kind == Kind::exponential || d_->kind == Kind::affine) return d_->kappa * x + d_->beta;
    return g(x);
  }

  double dg(double x) const {
    x = checked(x);
    switch (d_->kind) {
      case Kind::exponential:
      case Kind::affine:
        return d_->kappa;
      case Kind::tabulated:
        return d_->table.derivative(x);
      case Kind::dyadic: {
        auto [s, n] = d_->reduce(x);
        return d_->seed.dg(s);
      }
    }
    return 0.0;
  }

  // T(x) = integral of 1/g from x_lo to x.
  double time(double x) const { return time_raw(checked(x)); }

  double time_max() const { return time_raw(domain_hi()); }

  // Size with T(x) = t, or nothing when t falls outside [0, T(2 x_hi)].
  std::optional<double> size_at_time(double t) const {
    double tmax = time_max(), tol = 1e-12 * std::max(1.0, tmax);
    if (t < -tol || t > tmax + tol) return std::nullopt;
    t = std::clamp(t, 0.0, tmax);
    return std::clamp(inverse_time(t), domain_lo(), domain_hi());
  }

  // pi_a x, or nothing when the trajectory leaves the domain.
  std::optional<double> try_flow(double x, double a) const {
    if (!inside(x)) return std::nullopt;
    x = std::clamp(x, domain_lo(), domain_hi());
    switch (d_->kind) {
      case Kind::exponential: {
        double y = x * std::exp(d_->kappa * a);
        if (!inside(y)) return std::nullopt;
        return std::clamp(y, domain_lo(), domain_hi());
      }
      case Kind::affine: {
        double y;
        if (d_->kappa == 0.0) {
          y = x + d_->beta * a;
        } else {
          double c = d_->beta / d_->kappa;
          y = (x + c) * std::exp(d_->kappa * a) - c;
        }
        if (!inside(y)) return std::nullopt;
        return std::clamp(y, domain_lo(), domain_hi());
      }
      default:
        return size_at_time(time_raw(x) + a);
    }
  }

  double flow(double x, double a) const {
    auto y = try_flow(x, a);
    if (!y)
      throw DomainExit("flow from x=" + std::to_string(x) + " over a=" + std::to_string(a) +
                       " leaves the size domain");
    return *y;
  }

  // Age at which a cell of initial size x_b reaches size s (signed).
  double time_between(double x_b, double s) const {
    x_b = checked(x_b);
    s = checked(s);
    switch (d_->kind) {
      case Kind::exponential:
        return std::log(s / x_b) / d_->kappa;
      case Kind::affine:
        if (d_->kappa == 0.0) return (s - x_b) / d_->beta;
        return std::log((s + d_->beta / d_->kappa) / (x_b + d_->beta / d_->kappa)) / d_->kappa;
      default:
        return time_raw(s) - time_raw(x_b);
    }
  }

 private:
  struct Data {
    Kind kind;
    double x_lo = 0, x_hi = 0, kappa = 0, beta = 0;
    Pchip table;
    std::vector<double> t_nodes;
    double t_shift = 0;
    GrowthSeed seed;
    std::vector<double> oct_nodes;
    double t_oct = 0;

    std::pair<double, int> reduce(double x) const {
      int n = 0;
      double s = x;
      while (s >= 2.0 * x_lo) {
        s *= 0.5;
        ++n;
      }
      return {s, n};
    }

    // Partial cells use the cubic of the cell directly; 8 points are exact well past double
    // precision on a single table cell.
    double time_tab(double x) const {
      const auto& xs = table.x();
      const auto& ys = table.y();
      const auto& ds = table.slopes();
      std::size_t k = locate(xs, x);
      auto inv = [&](double r) { return 1.0 / hermite(xs[k], xs[k + 1], ys[k], ys[k + 1], ds[k], ds[k + 1], r); };
      return t_nodes[k] + integrate(inv, xs[k], x, 1, 8);
    }

    double time_seed(double s) const {
      const std::size_t cells = oct_nodes.size() - 1;
      double h = x_lo / cells;
      std::size_t k = std::min(cells - 1, static_cast<std::size_t>((s - x_lo) / h));
      double a = x_lo + k * h;
      return oct_nodes[k] + integrate([&](double r) { return 1.0 / seed.g(r); }, a, s, 1, 16);
    }
  };

  static std::shared_ptr<Data> base(Kind kind, double x_lo, double x_hi) {
    if (!(x_lo > 0) || !(x_hi > x_lo)) throw InvalidInput("growth window needs 0 < x_lo < x_hi");
    auto d = std::make_shared<Data>();
    d->kind = kind;
    d->x_lo = x_lo;
    d->x_hi = x_hi;
    return d;
  }

  explicit GrowthLaw(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  double g_raw(double x) const {
    switch (d_->kind) {
      case Kind::exponential:
        return d_->kappa * x;
      case Kind::affine:
        return d_->kappa * x + d_->beta;
      case Kind::tabulated:
        return d_->table(x);
      case Kind::dyadic: {
        auto [s, n] = d_->reduce(x);
        return std::ldexp(d_->seed.g(s), n);
      }
    }
    return 0.0;
  }

  double time_raw(double x) const {
    switch (d_->kind) {
      case Kind::exponential:
        return std::log(x / d_->x_lo) / d_->kappa;
      case Kind::affine:
        if (d_->kappa == 0.0) return (x - d_->x_lo) / d_->beta;
        return std::log((x + d_->beta / d_->kappa) / (d_->x_lo + d_->beta / d_->kappa)) / d_->kappa;
      case Kind::tabulated:
        return d_->time_tab(x) - d_->t_shift;
      case Kind::dyadic: {
        auto [s, n] = d_->reduce(x);
        return n * d_->t_oct + d_->time_seed(s);
      }
    }
    return 0.0;
  }

  // Newton on T(x) = t with a bisection safeguard on the bracketing interval.
  double inverse_time(double t) const {
    double lo, hi, x;
    switch (d_->kind) {
      case Kind::exponential:
        return d_->x_lo * std::exp(d_->kappa * t);
      case Kind::affine:
        if (d_->kappa == 0.0) return d_->x_lo + d_->beta * t;
        {
          double c = d_->beta / d_->kappa;
          return (d_->x_lo + c) * std::exp(d_->kappa * t) - c;
        }
      case Kind::tabulated: {
        const auto& xs = d_->table.x();
        double target = t + d_->t_shift;
        std::size_t k = locate(d_->t_nodes, target);
        lo = xs[k];
        hi = xs[k + 1];
        double f = (target - d_->t_nodes[k]) / (d_->t_nodes[k + 1] - d_->t_nodes[k]);
        x = lo + f * (hi - lo);
        auto T = [&](double y) { return d_->time_tab(y) - target; };
        return newton(T, [&](double y) { return d_->table(y); }, lo, hi, x);
      }
      case Kind::dyadic: {
        int n = static_cast<int>(std::floor(t / d_->t_oct));
        double r = t - n * d_->t_oct;
        if (r < 0) r = 0;
        if (r >= d_->t_oct) {
          r -= d_->t_oct;
          ++n;
        }
        const auto& tn = d_->oct_nodes;
        std::size_t k = locate(tn, r);
        const std::size_t cells = tn.size() - 1;
        double h = d_->x_lo / cells;
        lo = d_->x_lo + k * h;
        hi = lo + h;
        double f = (r - tn[k]) / (tn[k + 1] - tn[k]);
        x = lo + f * h;
        auto T = [&](double y) { return d_->time_seed(y) - r; };
        double s = newton(T, [&](double y) { return d_->seed.g(y); }, lo, hi, x);
        return std::ldexp(s, n);
      }
    }
    return 0.0;
  }

  template <class F, class G>
  static double newton(F&& T, G&& g, double lo, double hi, double x) {
    for (int it = 0; it < 60; ++it) {
      double r = T(x);
      if (r == 0.0) return x;
      if (r > 0) hi = std::min(hi, x);
      else lo = std::max(lo, x);
      double nx = x - r * g(x);
      if (!(nx >= lo && nx <= hi)) nx = 0.5 * (lo + hi);
      if (std::abs(nx - x) <= 1e-15 * std::abs(x)) return nx;
      x = nx;
    }
    return x;
  }

  std::shared_ptr<const Data> d_;
};

inline double flow(const GrowthLaw& law, double x, double a) { return law.flow(x, a); }

inline double daughter_size(const GrowthLaw& law, double x_b, double a) {
  return 0.5 * law.flow(x_b, a);
}

// a(y; x_b): cycle length after which a mother of initial size x_b yields daughters of size y.
inline double cycle_age(const GrowthLaw& law, double y, double x_b) {
  return law.time_between(x_b, 2.0 * y);
}

inline double jacobian_factor(const GrowthLaw& law, double x_b, double a) {
  double y = law.flow(2.0 * x_b, -a);
  return 2.0 * law.g(y) / law.g(2.0 * x_b);
}

// Smallest initial size whose daughters after an age-a division stay above x_lo.
inline double min_split_size(const GrowthLaw& law, double a) {
  if (!(a > 0)) throw BadAge("min_split_size needs a > 0");
  double s = law.try_flow(law.x_lo(), a).value_or(law.domain_hi() + 1.0);
  if (0.5 * s >= law.x_lo()) return law.x_lo();
  return law.flow(2.0 * law.x_lo(), -a);
}

}  // namespace cellcycle
