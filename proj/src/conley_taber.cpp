#include "rearrange/conley_taber.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace rearrange {

CTResult conley_taber_test(const PanelData& panel, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("conley_taber_test: alpha outside (0,1)");

  const long n = static_cast<long>(panel.rows.size());
  if (n == 0) throw std::invalid_argument("conley_taber_test: empty panel");

  std::map<std::string, long> cluster_id;
  std::map<int, long> time_id;
  std::vector<std::string> clusters;
  for (const auto& r : panel.rows) {
    if (!cluster_id.count(r.cluster)) {
      cluster_id[r.cluster] = static_cast<long>(clusters.size());
      clusters.push_back(r.cluster);
    }
    if (!time_id.count(r.time))
      time_id[r.time] = static_cast<long>(time_id.size());
  }
  if (!cluster_id.count(panel.treated_cluster))
    throw std::invalid_argument("conley_taber_test: treated cluster absent");

  Eigen::VectorXd y(n), x(n);
  std::vector<long> ci(n), ti(n);
  for (long i = 0; i < n; ++i) {
    const auto& r = panel.rows[i];
    y[i] = r.outcome;
    const bool treat = r.cluster == panel.treated_cluster && panel.is_post(r.time);
    x[i] = treat ? 1.0 : 0.0;
    ci[i] = cluster_id[r.cluster];
    ti[i] = time_id[r.time];
  }

  // Two-way within transformation by iterative demeaning over cluster and
  // time, to convergence 1e-10.
  const long nc = static_cast<long>(cluster_id.size());
  const long nt = static_cast<long>(time_id.size());
  auto demean = [&](Eigen::VectorXd& v) {
    for (int pass = 0; pass < 200; ++pass) {
      double moved = 0.0;
      Eigen::VectorXd mc = Eigen::VectorXd::Zero(nc);
      Eigen::VectorXd cnt_c = Eigen::VectorXd::Zero(nc);
      for (long i = 0; i < n; ++i) {
        mc[ci[i]] += v[i];
        cnt_c[ci[i]] += 1.0;
      }
      mc.array() /= cnt_c.array();
      for (long i = 0; i < n; ++i) v[i] -= mc[ci[i]];
      Eigen::VectorXd mt = Eigen::VectorXd::Zero(nt);
      Eigen::VectorXd cnt_t = Eigen::VectorXd::Zero(nt);
      for (long i = 0; i < n; ++i) {
        mt[ti[i]] += v[i];
        cnt_t[ti[i]] += 1.0;
      }
      mt.array() /= cnt_t.array();
      for (long i = 0; i < n; ++i) v[i] -= mt[ti[i]];
      moved = mc.cwiseAbs().maxCoeff() + mt.cwiseAbs().maxCoeff();
      if (moved < 1e-10) break;
    }
  };
  Eigen::VectorXd yt = y, xt = x;
  demean(yt);
  demean(xt);

  const double xx = xt.squaredNorm();
  if (xx < 1e-14)
    throw std::invalid_argument(
        "conley_taber_test: treatment interaction is collinear with the "
        "fixed effects");
  const double delta_hat = xt.dot(yt) / xx;

  // Residuals from the full regression (Frisch-Waugh).
  Eigen::VectorXd resid = yt - delta_hat * xt;

  // Per control cluster: regress residuals on constant + post indicator and
  // keep the post coefficient.
  std::vector<double> placebo;
  for (const auto& cname : clusters) {
    if (cname == panel.treated_cluster) continue;
    const long cid = cluster_id[cname];
    double n_pre = 0, n_post = 0, sum_pre = 0, sum_post = 0;
    for (long i = 0; i < n; ++i) {
      if (ci[i] != cid) continue;
      if (panel.is_post(panel.rows[i].time)) {
        n_post += 1.0;
        sum_post += resid[i];
      } else {
        n_pre += 1.0;
        sum_pre += resid[i];
      }
    }
    if (n_pre == 0 || n_post == 0)
      throw std::invalid_argument("conley_taber_test: cluster " + cname +
                                  " lacks pre or post observations");
    placebo.push_back(sum_post / n_post - sum_pre / n_pre);
  }
  const long q = static_cast<long>(placebo.size());
  if (q == 0)
    throw std::invalid_argument("conley_taber_test: no control clusters");

  std::vector<double> sorted = placebo;
  std::sort(sorted.begin(), sorted.end());
  const long k = static_cast<long>(std::ceil((1.0 - alpha) * q));
  const long idx = std::clamp(k, 1L, q) - 1;

  CTResult res;
  res.delta_hat = delta_hat;
  res.placebo_coefficients =
      Eigen::Map<Eigen::VectorXd>(placebo.data(), q);
  res.critical_value = sorted[idx];
  res.reject = delta_hat > res.critical_value;
  res.alpha = alpha;
  return res;
}

}  // namespace rearrange
