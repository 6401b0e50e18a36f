#include "rearrange/size_bound.hpp"

#include <cmath>
#include <stdexcept>

#include "rearrange/numerics.hpp"
#include "rearrange/weights.hpp"

namespace rearrange {

const char* grade_name(Grade g) {
  switch (g) {
    case Grade::infeasible: return "infeasible";
    case Grade::loose: return "loose";
    case Grade::near_tight: return "near_tight";
  }
  return "infeasible";
}

double centering_adjustment(int q, double w) {
  if (q <= 2) throw std::invalid_argument("centering_adjustment: requires q >= 3");
  if (!(w > 0.0 && w < 1.0))
    throw std::invalid_argument("centering_adjustment: w outside (0,1)");

  const double root_qm1_w = std::sqrt(static_cast<double>(q - 1)) * w;
  auto obj = [&](double t) {
    return std::pow(std_normal_cdf(root_qm1_w * t), q - 1) +
           2.0 * std_normal_cdf(-q * t);
  };

  // The objective is >= 1 at t in {0, inf} and < 1 at t = 1/q, so the minimum
  // is interior. Geometric pre-scan over (1e-6, 50], golden section on the
  // best bracket.
  double best_t = 1.0 / q, best_f = obj(best_t);
  const int n = 400;
  const double lo = 1e-6, hi = 50.0;
  const double ratio = std::pow(hi / lo, 1.0 / n);
  double prev = lo, cur = lo;
  double bracket_lo = lo, bracket_hi = hi;
  for (int i = 0; i <= n; ++i) {
    const double fi = obj(cur);
    if (fi < best_f) {
      best_f = fi;
      best_t = cur;
      bracket_lo = prev;
      bracket_hi = std::min(hi, cur * ratio);
    }
    prev = cur;
    cur *= ratio;
  }
  ScalarResult r = minimize_scalar(obj, bracket_lo, bracket_hi, {1e-8, 0.0, 200});
  return std::min(r.value, best_f);
}

double oracle_integral(int q, double w, double rho) {
  if (q < 2) throw std::invalid_argument("oracle_integral: requires q >= 2");
  if (!(w > 0.0 && w < 1.0))
    throw std::invalid_argument("oracle_integral: w outside (0,1)");
  if (!(rho > 0.0)) throw std::invalid_argument("oracle_integral: rho <= 0");

  const double slope = (1.0 - w) * rho;
  auto f = [&](double y) {
    return std::pow(std_normal_cdf(slope * y), q - 1) * std_normal_pdf(y);
  };
  return integrate_halfline(f, {1e-10, 0.0, 400});
}

BoundComponents size_bound(int q, double w, double rho) {
  if (q <= 2) throw std::invalid_argument("size_bound: requires q >= 3");
  BoundComponents b;
  b.q = q;
  b.w = w;
  b.rho = rho;
  b.escape_term = std::ldexp(1.0, -(q + 1));
  b.oracle_integral = oracle_integral(q, w, rho);
  b.centering_adjustment = centering_adjustment(q, w);
  b.total = b.escape_term + b.oracle_integral + b.centering_adjustment;
  return b;
}

TightnessGrade classify_tightness(int q, double alpha, double rho) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("classify_tightness: alpha outside (0,0.5)");
  TightnessGrade g;
  const auto w = weight({alpha, rho, q});
  if (!w) {
    g.grade = Grade::infeasible;
    g.slack = 1.0;
    return g;
  }
  const BoundComponents b = size_bound(q, *w, rho);
  g.slack = b.escape_term + b.centering_adjustment;
  if (g.slack > alpha / 2.0)
    g.grade = Grade::infeasible;
  else if (g.slack > alpha / 10.0)
    g.grade = Grade::loose;
  else
    g.grade = Grade::near_tight;
  return g;
}

}  // namespace rearrange
