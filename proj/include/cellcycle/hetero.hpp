#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cycle.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "validate.hpp"

namespace cellcycle {

// Multi-type division: a type-i mother yields type-j daughters with probability r[i][j],
// each of size beta[i][j] times the mother's size at division.
class HeteroDivisionRule {
 public:
  HeteroDivisionRule(std::vector<std::vector<double>> r, std::vector<std::vector<double>> beta,
                     std::vector<GrowthLaw> laws, std::vector<CycleModel> models)
      : r_(std::move(r)), beta_(std::move(beta)), laws_(std::move(laws)), models_(std::move(models)) {
    const std::size_t n = laws_.size();
    if (n == 0 || models_.size() != n || r_.size() != n || beta_.size() != n)
      throw InvalidInput("hetero rule: r, beta, laws and models must agree on the type count");
    for (std::size_t i = 0; i < n; ++i) {
      if (r_[i].size() != n || beta_[i].size() != n)
        throw InvalidInput("hetero rule: r and beta must be square");
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!(r_[i][j] >= 0)) throw InvalidInput("hetero rule: r[" + std::to_string(i) + "][" + std::to_string(j) + "] < 0");
        if (!(beta_[i][j] > 0 && beta_[i][j] < 1))
          throw InvalidInput("hetero rule: beta[" + std::to_string(i) + "][" + std::to_string(j) + "] outside (0, 1)");
        sum += r_[i][j];
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidInput("hetero rule: row " + std::to_string(i) + " of r does not sum to 1");
    }
  }

  std::size_t n_types() const { return laws_.size(); }
  double r(std::size_t i, std::size_t j) const { return r_.at(i).at(j); }
  double beta(std::size_t i, std::size_t j) const { return beta_.at(i).at(j); }
  const GrowthLaw& law(std::size_t i) const { return laws_.at(i); }
  const CycleModel& model(std::size_t i) const { return models_.at(i); }

 private:
  std::vector<std::vector<double>> r_, beta_;
  std::vector<GrowthLaw> laws_;
  std::vector<CycleModel> models_;
};

inline double hetero_daughter_size(const HeteroDivisionRule& rule, std::size_t i, std::size_t j,
                                   double x_b, double a) {
  rule.model(i).window_check(x_b);
  return rule.beta(i, j) * rule.law(i).flow(x_b, a);
}

struct TransferPoint {
  double factor = 0.0;  // r_ij / beta_ij * g(source at division) / g(x_b / beta_ij)
  double source = 0.0;  // mother initial size pi_{-a}(x_b / beta_ij)
  bool valid = false;
};

// Density factor of the type i -> j Frobenius-Perron operator at daughter size x_b.
inline TransferPoint hetero_transfer(const HeteroDivisionRule& rule, std::size_t i, std::size_t j,
                                     double x_b, double a) {
  const GrowthLaw& g = rule.law(i);
  double b = rule.beta(i, j), s = x_b / b;
  TransferPoint out;
  if (!g.inside(s)) return out;
  auto y = g.try_flow(s, -a);
  if (!y) return out;
  out.source = *y;
  out.factor = rule.r(i, j) / b * g.g(*y) / g.g(s);
  out.valid = true;
  return out;
}

// Advisory notes on the slow/fast proliferation ordering between types 0 and 1.
inline std::vector<std::string> hetero_warnings(const HeteroDivisionRule& rule) {
  std::vector<std::string> notes;
  if (rule.n_types() != 2) return notes;
  const GrowthLaw &g0 = rule.law(0), &g1 = rule.law(1);
  double lo = std::max(g0.domain_lo(), g1.domain_lo()), hi = std::min(g0.domain_hi(), g1.domain_hi());
  if (lo < hi) {
    int slower = 0, faster = 0;
    for (int k = 0; k <= 64; ++k) {
      double x = lo + (hi - lo) * k / 64.0;
      double d = g0.g(x) - g1.g(x);
      if (d < 0) ++slower;
      if (d > 0) ++faster;
    }
    if (slower > 0 && faster > 0) notes.push_back("growth laws cross: no slow/fast ordering of g");
  }
  const CycleModel &q0 = rule.model(0), &q1 = rule.model(1);
  double m0 = q0.mean_cycle(0.5 * (q0.x_lo() + q0.x_hi()));
  double m1 = q1.mean_cycle(0.5 * (q1.x_lo() + q1.x_hi()));
  double gm0 = g0.g(0.5 * (q0.x_lo() + q0.x_hi())), gm1 = g1.g(0.5 * (q1.x_lo() + q1.x_hi()));
  if ((gm0 < gm1) != (m0 > m1) && gm0 != gm1)
    notes.push_back("slower-growing type does not have the longer mean cycle");
  return notes;
}

// Per-type A1-A4 and A7, plus a multi-type A5: every type-j daughter of a type-i mother
// with r_ij > 0 lands in the type-j window. The single-type A6 has no analogue here.
inline AssumptionReport validate_hetero(const HeteroDivisionRule& rule, int grid = 256) {
  AssumptionReport rep;
  const std::size_t n = rule.n_types();
  for (std::size_t i = 0; i < n; ++i) {
    auto one = validate_assumptions(rule.law(i), rule.model(i), grid);
    for (auto row : one.rows) {
      if (row.id == "A5" || row.id == "A6") continue;
      row.id += "[" + std::to_string(i) + "]";
      rep.rows.push_back(row);
    }
  }
  AssumptionRow r5{"A5_hetero"};
  double worst = INFINITY;
  for (std::size_t i = 0; i < n && r5.note.empty(); ++i) {
    const CycleModel& m = rule.model(i);
    for (int k = 0; k < grid && r5.note.empty(); ++k) {
      double x = m.x_lo() + (m.x_hi() - m.x_lo()) * k / (grid - 1);
      double alo, ahi;
      try {
        alo = m.a_lo(x);
        ahi = m.a_hi(x);
      } catch (const Error& e) {
        r5.note = e.what();
        worst = -INFINITY;
        break;
      }
      for (double a : {alo, ahi}) {
        auto y = rule.law(i).try_flow(x, a);
        for (std::size_t j = 0; j < n; ++j) {
          if (rule.r(i, j) == 0.0) continue;
          const CycleModel& mj = rule.model(j);
          double margin = -INFINITY;
          if (y) {
            double d = rule.beta(i, j) * *y;
            margin = std::min(d - mj.x_lo(), mj.x_hi() - d) / (mj.x_hi() - mj.x_lo());
          }
          if (margin < worst) {
            worst = margin;
            r5.worst_x = x;
          }
        }
      }
    }
  }
  r5.worst_value = worst;
  if (!(worst >= -1e-9)) r5.status = Status::fail;
  rep.rows.push_back(r5);
  return rep;
}

}  // namespace cellcycle
