#ifndef REARRANGE_SIZE_BOUND_HPP
#define REARRANGE_SIZE_BOUND_HPP

namespace rearrange {

// Additive decomposition of the size bound xi_q(w, rho).
struct BoundComponents {
  double escape_term = 0.0;           // 1 / 2^(q+1)
  double oracle_integral = 0.0;       // integral piece
  double centering_adjustment = 0.0;  // min-over-t piece
  double total = 0.0;
  int q = 0;
  double w = 0.0;
  double rho = 0.0;
};

enum class Grade { infeasible, loose, near_tight };

struct TightnessGrade {
  Grade grade = Grade::infeasible;
  double slack = 0.0;  // non-tight share of the bound at the solving weight
};

const char* grade_name(Grade g);

// min over t > 0 of Phi(sqrt(q-1) w t)^(q-1) + 2 Phi(-q t). Requires q >= 3.
double centering_adjustment(int q, double w);

// Integral over (0, inf) of Phi((1-w) rho y)^(q-1) phi(y) dy.
double oracle_integral(int q, double w, double rho);

// xi_q(w, rho) with its three components.
BoundComponents size_bound(int q, double w, double rho);

// Grades an (alpha, rho, q) cell by how much of the bound at the solving
// weight is taken up by the non-tight parts: infeasible when no weight solves
// xi = alpha or slack > alpha/2, loose when slack in (alpha/10, alpha/2],
// near_tight when slack <= alpha/10.
TightnessGrade classify_tightness(int q, double alpha, double rho);

}  // namespace rearrange

#endif
