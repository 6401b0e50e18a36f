#ifndef REARRANGE_ESTIMATORS_HPP
#define REARRANGE_ESTIMATORS_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "rearrange/test_engine.hpp"

namespace rearrange {

struct PanelRow {
  std::string unit;
  std::string cluster;
  int time = 0;
  double outcome = 0.0;
  std::vector<double> covariates;
};

struct PanelData {
  std::vector<PanelRow> rows;
  std::string treated_cluster;
  int first_post_time = 0;

  bool is_post(int t) const { return t >= first_post_time; }
};

struct CrossSectionRow {
  std::string unit;
  std::string cluster;
  double outcome = 0.0;
  std::vector<double> covariates;
};

struct CrossSectionData {
  std::vector<CrossSectionRow> rows;
  std::string treated_cluster;
};

struct RegressionFit {
  double target = 0.0;  // the theta estimate for the cluster
  Eigen::VectorXd slopes;
  std::string cluster;
  long n_obs = 0;
};

// Least squares via column-pivoted QR; throws on rank deficiency, naming the
// collinear column.
Eigen::VectorXd ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& design);

// One regression per cluster; the coefficient on the post indicator is the
// cluster-level estimate. Individual-level two-period panels are
// first-differenced within unit; longer individual panels are demeaned
// within unit; aggregated panels (one unit per cluster) are fit directly on
// a constant and the post indicator.
EstimateVector did_cluster_estimates(const PanelData& panel);

// Per-cluster regression of the outcome on an intercept and covariates; the
// intercept is the cluster-level estimate.
EstimateVector cluster_treatment_estimates(const CrossSectionData& data);

// CSV input, headers unit,cluster,time,outcome[,x1,...] and
// unit,cluster,outcome[,x1,...].
PanelData read_panel_csv(const std::string& path,
                         const std::string& treated_cluster,
                         int first_post_time);
CrossSectionData read_cross_section_csv(const std::string& path,
                                        const std::string& treated_cluster);

}  // namespace rearrange

#endif
