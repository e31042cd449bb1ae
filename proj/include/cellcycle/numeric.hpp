#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace cellcycle {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

namespace detail {

inline GaussRule compute_gauss_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

}  // namespace detail

// Cached Gauss-Legendre rule with n points on [-1, 1].
inline const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(detail::compute_gauss_rule(n));
  return *slot;
}

// Integral of f over [a, b] with `panels` equal panels of an n-point rule.
template <class F>
double integrate(F&& f, double a, double b, int panels = 1, int n = 32) {
  if (!(b > a)) return 0.0;
  const GaussRule& r = gauss_legendre(n);
  double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    double mid = a + (p + 0.5) * h, half = 0.5 * h;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += r.w[k] * f(mid + half * r.x[k]);
    sum += s * half;
  }
  return sum;
}

// Monotone cubic Hermite slopes (Fritsch-Butland harmonic weighting).
inline void pchip_slopes(std::span<const double> x, std::span<const double> y,
                         std::span<double> d) {
  const std::size_t n = x.size();
  if (n < 2) {
    if (n == 1) d[0] = 0.0;
    return;
  }
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return;
  }
  auto h = [&](std::size_t k) { return x[k + 1] - x[k]; };
  auto del = [&](std::size_t k) { return (y[k + 1] - y[k]) / h(k); };
  for (std::size_t k = 1; k + 1 < n; ++k) {
    double d0 = del(k - 1), d1 = del(k);
    if (d0 * d1 <= 0.0) {
      d[k] = 0.0;
    } else {
      double w1 = 2.0 * h(k) + h(k - 1), w2 = h(k) + 2.0 * h(k - 1);
      d[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
    return s;
  };
  d[0] = end_slope(h(0), h(1), del(0), del(1));
  d[n - 1] = end_slope(h(n - 2), h(n - 3), del(n - 2), del(n - 3));
}

// Index k with x[k] <= t < x[k+1], clamped to [0, n-2].
inline std::size_t locate(std::span<const double> x, double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(k, x.size() - 2);
}

inline double hermite(double x0, double x1, double y0, double y1, double d0, double d1,
                      double t) {
  double h = x1 - x0, s = (t - x0) / h;
  double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

inline double hermite_derivative(double x0, double x1, double y0, double y1, double d0,
                                 double d1, double t) {
  double h = x1 - x0, s = (t - x0) / h;
  double s2 = s * s;
  return ((6 * s2 - 6 * s) * y0 + (-6 * s2 + 6 * s) * y1) / h + (3 * s2 - 4 * s + 1) * d0 +
         (3 * s2 - 2 * s) * d1;
}

// Evaluates a PCHIP interpolant; constant extrapolation outside [x0, xn].
inline double pchip_eval(std::span<const double> x, std::span<const double> y,
                         std::span<const double> d, double t) {
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  std::size_t k = locate(x, t);
  return hermite(x[k], x[k + 1], y[k], y[k + 1], d[k], d[k + 1], t);
}

class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), d_(x_.size()) {
    pchip_slopes(x_, y_, d_);
  }
  double operator()(double t) const { return pchip_eval(x_, y_, d_, t); }
  double derivative(double t) const {
    if (t < x_.front() || t > x_.back()) return 0.0;
    std::size_t k = locate(x_, t);
    return hermite_derivative(x_[k], x_[k + 1], y_[k], y_[k + 1], d_[k], d_[k + 1], t);
  }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& slopes() const { return d_; }

 private:
  std::vector<double> x_, y_, d_;
};

// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is handled by
// exactly one call, so results written per index do not depend on `threads`.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  if (n == 0) return;
  std::size_t t = static_cast<std::size_t>(std::max(1, threads));
  t = std::min(t, n);
  if (t == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  std::size_t chunk = (n + t - 1) / t;
  for (std::size_t k = 1; k < t; ++k) {
    std::size_t b = k * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

// Counter-based stream: splitmix64 over (key, counter).
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(mix(seed ^ mix(stream_id + 0x632be59bd9b4e019ULL))) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cellcycle
