#include "rearrange/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rearrange {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double fa, double b, double fb, double m, double fm,
                        double whole, double eps, int depth, int max_depth,
                        bool& ok) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * eps || depth >= max_depth) {
    if (depth >= max_depth && std::abs(delta) > 15.0 * eps) ok = false;
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth + 1,
                          max_depth, ok) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth + 1,
                          max_depth, ok);
}

}  // namespace

double integrate_halfline(const std::function<double(double)>& f,
                          const Tolerance& tol) {
  // Integrands here are bounded by phi(y), so the tail beyond y = 9 carries
  // less than 1e-18 of mass.
  const double a = 0.0, b = 9.0;
  bool ok = true;
  // Split into a few panels so the recursion starts from a reasonable grid.
  const int panels = 8;
  double total = 0.0;
  const int max_depth = std::max(10, tol.max_iter / panels);
  for (int p = 0; p < panels; ++p) {
    const double pa = a + (b - a) * p / panels;
    const double pb = a + (b - a) * (p + 1) / panels;
    const double pm = 0.5 * (pa + pb);
    const double fa = f(pa), fb = f(pb), fm = f(pm);
    const double whole = simpson(f, pa, fa, pb, fb, pm, fm);
    total += adaptive_simpson(f, pa, fa, pb, fb, pm, fm, whole,
                              tol.abs_tol / panels, 0, max_depth, ok);
  }
  if (!ok) throw std::runtime_error("integrate_halfline: did not converge");
  return total;
}

ScalarResult minimize_scalar(const std::function<double(double)>& f, double lo,
                             double hi, const Tolerance& tol) {
  if (!(lo < hi)) throw std::invalid_argument("minimize_scalar: lo >= hi");

  const int n = 200;
  double best_x = lo, best_f = f(lo);
  std::vector<double> xs(n + 1), fs(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[i] = lo + (hi - lo) * i / n;
    fs[i] = f(xs[i]);
    if (fs[i] < best_f) {
      best_f = fs[i];
      best_x = xs[i];
    }
  }
  // Bracket around the grid minimum.
  int idx = 0;
  for (int i = 0; i <= n; ++i)
    if (xs[i] == best_x) idx = i;
  double a = xs[std::max(0, idx - 1)];
  double b = xs[std::min(n, idx + 1)];

  // Golden-section on [a, b].
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int it = 0;
  while (b - a > tol.abs_tol && it < tol.max_iter) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
    ++it;
  }
  ScalarResult r;
  r.x = 0.5 * (a + b);
  r.value = f(r.x);
  if (best_f < r.value) {
    r.x = best_x;
    r.value = best_f;
  }
  r.converged = (b - a) <= tol.abs_tol;
  r.iterations = it;
  return r;
}

std::optional<ScalarResult> find_smallest_root(
    const std::function<double(double)>& f, double lo, double hi,
    double scan_step, const Tolerance& tol) {
  if (!(lo < hi)) throw std::invalid_argument("find_smallest_root: lo >= hi");

  double a = lo, fa = f(a);
  if (fa == 0.0) return ScalarResult{a, 0.0, true, 0};
  double b = a;
  bool found = false;
  while (b < hi) {
    b = std::min(b + scan_step, hi);
    const double fb = f(b);
    if (fb == 0.0) return ScalarResult{b, 0.0, true, 0};
    if ((fa < 0.0) != (fb < 0.0)) {
      found = true;
      break;
    }
    a = b;
    fa = fb;
  }
  if (!found) return std::nullopt;

  // Bisection on [a, b].
  int it = 0;
  double fb = f(b);
  while (b - a > tol.abs_tol && it < tol.max_iter) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return ScalarResult{m, 0.0, true, it};
    if ((fa < 0.0) != (fm < 0.0)) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
    ++it;
  }
  ScalarResult r;
  r.x = 0.5 * (a + b);
  r.value = f(r.x);
  r.converged = (b - a) <= tol.abs_tol;
  r.iterations = it;
  return r;
}

}  // namespace rearrange
