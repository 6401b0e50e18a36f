#ifndef REARRANGE_CONLEY_TABER_HPP
#define REARRANGE_CONLEY_TABER_HPP

#include <Eigen/Core>

#include "rearrange/estimators.hpp"

namespace rearrange {

struct CTResult {
  double delta_hat = 0.0;
  Eigen::VectorXd placebo_coefficients;  // one per control cluster
  double critical_value = 0.0;
  bool reject = false;
  double alpha = 0.0;
};

// Baseline comparison test: two-way fixed-effects coefficient on the
// treatment interaction against the empirical (1-alpha) quantile of placebo
// coefficients from per-control-cluster residual regressions on a constant
// and the post indicator. The quantile is the ceil((1-alpha) q)-th order
// statistic.
CTResult conley_taber_test(const PanelData& panel, double alpha);

}  // namespace rearrange

#endif
