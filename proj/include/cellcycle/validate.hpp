#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cycle.hpp"
#include "growth.hpp"
#include "numeric.hpp"

namespace cellcycle {

enum class Status { pass, fail, warn, not_verified };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::warn: return "warn";
    case Status::not_verified: return "not_verified";
  }
  return "?";
}

struct AssumptionRow {
  AssumptionRow() = default;
  explicit AssumptionRow(std::string name) : id(std::move(name)) {}

  std::string id;
  Status status = Status::pass;
  double worst_x = std::numeric_limits<double>::quiet_NaN();
  double worst_value = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionRow> rows;

  // True when A1-A6 hold (A7 and continuity notes are advisory).
  bool core_ok() const {
    for (const auto& r : rows)
      if (r.status == Status::fail && r.id.rfind("A7", 0) != 0) return false;
    return true;
  }
  bool aeg_ok() const {
    bool seen = false;
    for (const auto& r : rows)
      if (r.id.rfind("A7", 0) == 0) {
        if (r.status != Status::pass) return false;
        seen = true;
      }
    return seen;
  }
  const AssumptionRow* find(const std::string& id) const {
    for (const auto& r : rows)
      if (r.id == id) return &r;
    return nullptr;
  }

  std::string text() const {
    std::ostringstream os;
    for (const auto& r : rows) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%-14s %-13s worst_x=%-12.6g worst_value=%-12.6g", r.id.c_str(),
                    to_string(r.status), r.worst_x, r.worst_value);
      os << buf;
      if (!r.note.empty()) os << "  " << r.note;
      os << '\n';
    }
    return os.str();
  }

  std::string csv() const {
    std::ostringstream os;
    os << "assumption,status,worst_x,worst_value\n";
    for (const auto& r : rows) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.worst_x, r.worst_value);
      os << r.id << ',' << to_string(r.status) << ',' << buf << '\n';
    }
    return os.str();
  }
};

namespace detail {

inline std::vector<double> window_nodes(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = lo + (hi - lo) * k / (n - 1);
  return x;
}

}  // namespace detail

inline AssumptionReport validate_assumptions(const GrowthLaw& law, const CycleModel& model, int grid = 256) {
  AssumptionReport rep;
  const double xlo = model.x_lo(), xhi = model.x_hi();
  const auto nodes = detail::window_nodes(xlo, xhi, grid);
  const double tol = 1e-9 * xhi;

  {  // A1: g positive on [x_lo, 2 x_hi]; the growth window must cover the cycle window
    AssumptionRow r{"A1"};
    double worst = INFINITY;
    try {
      for (int k = 0; k < 2 * grid; ++k) {
        double x = law.domain_lo() + (law.domain_hi() - law.domain_lo()) * k / (2 * grid - 1);
        double g = law.g(x);
        if (g < worst) {
          worst = g;
          r.worst_x = x;
        }
      }
      r.worst_value = worst;
      if (!(worst > 0)) r.status = Status::fail;
      if (law.x_lo() > xlo + tol || law.x_hi() < xhi - tol) {
        r.status = Status::fail;
        r.note = "cycle window not covered by the growth window";
      }
    } catch (const Error& e) {
      r.status = Status::fail;
      r.note = e.what();
    }
    rep.rows.push_back(r);
  }

  std::vector<double> alo(grid), ahi(grid);
  bool bounds_ok = true;
  {  // A3: 0 < a_lo < a_hi < inf, q > 0 inside and 0 outside
    AssumptionRow r{"A3"};
    double worst = INFINITY;
    try {
      for (int k = 0; k < grid; ++k) {
        double x = nodes[k];
        alo[k] = model.a_lo(x);
        ahi[k] = model.a_hi(x);
        double margin = std::min(alo[k], ahi[k] - alo[k]);
        bool bad = !(alo[k] > 0) || !(ahi[k] > alo[k]) || !std::isfinite(ahi[k]);
        double w = ahi[k] - alo[k];
        for (int j = 1; j < 16 && !bad; ++j)
          if (!(model.q(x, alo[k] + w * j / 16.0) > 0)) bad = true;
        if (model.q(x, alo[k] - 1e-6 * w) != 0.0 || model.q(x, ahi[k] + 1e-6 * w) != 0.0) bad = true;
        if (bad) margin = -1.0;
        if (margin < worst) {
          worst = margin;
          r.worst_x = x;
        }
      }
      r.worst_value = worst;
      if (!(worst > 0)) r.status = Status::fail;
    } catch (const Error& e) {
      r.status = Status::fail;
      r.note = e.what();
      bounds_ok = false;
    }
    rep.rows.push_back(r);
  }

  {  // A2: unit mass; continuity of q at the support edges reported separately
    AssumptionRow r{"A2"}, c{"A2_continuity"};
    double worst = 0.0, jump = 0.0;
    if (bounds_ok) {
      for (int k = 0; k < grid; ++k) {
        double x = nodes[k];
        double m = model.kind() == CycleModel::Kind::tabulated
                       ? model.cdf(x, ahi[k]) - model.cdf(x, alo[k])
                       : integrate([&](double a) { return model.q(x, a); }, alo[k], ahi[k], 16, 32);
        double e = std::abs(m - 1.0);
        if (e > worst || k == 0) {
          worst = e;
          r.worst_x = x;
        }
        double w = ahi[k] - alo[k], peak = 0.0;
        for (int j = 1; j < 64; ++j) peak = std::max(peak, model.q(x, alo[k] + w * j / 64.0));
        double edge = std::max(model.q(x, alo[k] + 1e-9 * w), model.q(x, ahi[k] - 1e-9 * w)) / peak;
        if (edge > jump) {
          jump = edge;
          c.worst_x = x;
        }
      }
      r.worst_value = worst;
      if (!(worst < 1e-8)) r.status = Status::fail;
      c.worst_value = jump;
      if (jump > 1e-6) {
        c.status = Status::not_verified;
        c.note = "q jumps at the support edge";
      }
    } else {
      r.status = c.status = Status::fail;
    }
    rep.rows.push_back(r);
    rep.rows.push_back(c);
  }

  {  // A4: a_lo, a_hi continuous (increments shrink under refinement)
    AssumptionRow r{"A4"};
    if (bounds_ok) {
      try {
        auto fine = detail::window_nodes(xlo, xhi, 4 * grid - 3);
        double coarse_jump = 0.0, fine_jump = 0.0, at = xlo;
        for (int k = 1; k < grid; ++k)
          coarse_jump = std::max({coarse_jump, std::abs(alo[k] - alo[k - 1]), std::abs(ahi[k] - ahi[k - 1])});
        double pl = model.a_lo(fine[0]), ph = model.a_hi(fine[0]);
        for (std::size_t k = 1; k < fine.size(); ++k) {
          double l = model.a_lo(fine[k]), h = model.a_hi(fine[k]);
          double j = std::max(std::abs(l - pl), std::abs(h - ph));
          if (j > fine_jump) {
            fine_jump = j;
            at = fine[k];
          }
          pl = l;
          ph = h;
        }
        r.worst_x = at;
        r.worst_value = fine_jump;
        double scale = *std::max_element(ahi.begin(), ahi.end());
        if (fine_jump > 0.75 * coarse_jump && fine_jump > 1e-6 * scale) r.status = Status::fail;
      } catch (const Error& e) {
        r.status = Status::fail;
        r.note = e.what();
      }
    } else {
      r.status = Status::fail;
    }
    rep.rows.push_back(r);
  }

  {  // A5 and A6: daughters stay in the window; S_alo(x) < x < S_ahi(x) inside
    AssumptionRow r5{"A5"}, r6{"A6"};
    double w5 = INFINITY, w6 = INFINITY;
    if (bounds_ok) {
      for (int k = 0; k < grid; ++k) {
        double x = nodes[k];
        auto lo = law.try_flow(x, alo[k]);
        auto hi = law.try_flow(x, ahi[k]);
        if (!lo || !hi) {
          r5.status = Status::fail;
          r5.worst_x = x;
          r5.note = "flow leaves the size domain before division";
          w5 = -INFINITY;
          continue;
        }
        double slo = 0.5 * *lo, shi = 0.5 * *hi;
        double m5 = std::min(slo - xlo, xhi - shi) / (xhi - xlo);
        if (m5 < w5) {
          w5 = m5;
          r5.worst_x = x;
        }
        if (k > 0 && k + 1 < grid) {
          double m6 = std::min(x - slo, shi - x) / (xhi - xlo);
          if (m6 < w6) {
            w6 = m6;
            r6.worst_x = x;
          }
        }
      }
      r5.worst_value = w5;
      r6.worst_value = w6;
      if (!(w5 >= -1e-9)) r5.status = Status::fail;
      if (!(w6 > 0)) r6.status = Status::fail;
    } else {
      r5.status = r6.status = Status::fail;
    }
    rep.rows.push_back(r5);
    rep.rows.push_back(r6);
  }

  {  // A7: some x with g(2x) != 2 g(x)
    AssumptionRow r{"A7"};
    double best = 0.0;
    try {
      for (int k = 1; k + 1 < grid; ++k) {
        double x = nodes[k];
        double d = std::abs(law.g(2 * x) - 2 * law.g(x)) / law.g(2 * x);
        if (d > best) {
          best = d;
          r.worst_x = x;
        }
      }
    } catch (const Error& e) {
      r.note = e.what();
    }
    r.worst_value = best;
    if (!(best > 1e-9)) {
      r.status = Status::warn;
      r.note = "g(2x) = 2g(x) on the window: no asynchronous exponential growth expected";
    }
    rep.rows.push_back(r);
  }
  return rep;
}

inline void require_core_assumptions(const GrowthLaw& law, const CycleModel& model, int grid = 256) {
  auto rep = validate_assumptions(law, model, grid);
  if (!rep.core_ok()) throw AssumptionViolation("model violates A1-A6:\n" + rep.text());
}

}  // namespace cellcycle
