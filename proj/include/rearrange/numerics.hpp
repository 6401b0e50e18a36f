#ifndef REARRANGE_NUMERICS_HPP
#define REARRANGE_NUMERICS_HPP

#include <functional>
#include <optional>

namespace rearrange {

struct Tolerance {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_iter = 200;
};

struct ScalarResult {
  double x = 0.0;      // argmin or root
  double value = 0.0;  // f(x)
  bool converged = false;
  int iterations = 0;
};

// Standard normal distribution function, |error| <= 1e-12 on finite inputs.
double std_normal_cdf(double x);

// Standard normal density exp(-x^2/2)/sqrt(2*pi).
double std_normal_pdf(double x);

// Integral of f over [0, infinity) for integrands dominated by the standard
// normal density. The half-line is truncated at y = 9; the remaining mass of
// any phi-dominated integrand is below 1e-18. Adaptive Simpson refinement
// down to tol.abs_tol; throws std::runtime_error on non-convergence.
double integrate_halfline(const std::function<double(double)>& f,
                          const Tolerance& tol = {});

// Bracketed scalar minimization: coarse grid scan over [lo, hi] followed by
// golden-section refinement of the best bracket. The objective need not be
// unimodal; the scan picks the global grid minimum first.
ScalarResult minimize_scalar(const std::function<double(double)>& f,
                             double lo, double hi,
                             const Tolerance& tol = {1e-8, 0.0, 200});

// Leftmost root of f on (lo, hi): scan at fixed step for the first sign
// change, then bisect. Returns nullopt when no sign change is found.
std::optional<ScalarResult> find_smallest_root(
    const std::function<double(double)>& f, double lo, double hi,
    double scan_step = 1e-3, const Tolerance& tol = {1e-6, 0.0, 200});

}  // namespace rearrange

#endif
