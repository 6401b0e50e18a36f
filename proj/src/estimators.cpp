#include "rearrange/estimators.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rearrange {

Eigen::VectorXd ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& design) {
  if (design.rows() != y.size())
    throw std::invalid_argument("ols: row count mismatch");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    // Name one column involved in the collinearity: the first pivoted-out one.
    const auto& perm = qr.colsPermutation().indices();
    const long bad = perm[qr.rank()];
    throw std::invalid_argument("ols: design is rank deficient (column " +
                                std::to_string(bad) + " is collinear)");
  }
  return qr.solve(y);
}

namespace {

struct ClusterBlock {
  std::string cluster;
  std::vector<const PanelRow*> rows;
};

std::vector<ClusterBlock> group_by_cluster(const PanelData& panel) {
  std::vector<ClusterBlock> blocks;
  std::map<std::string, size_t> index;
  for (const auto& r : panel.rows) {
    auto it = index.find(r.cluster);
    if (it == index.end()) {
      index.emplace(r.cluster, blocks.size());
      blocks.push_back({r.cluster, {}});
      it = index.find(r.cluster);
    }
    blocks[it->second].rows.push_back(&r);
  }
  return blocks;
}

size_t covariate_count(const std::vector<const PanelRow*>& rows,
                       const std::string& cluster) {
  const size_t p = rows.front()->covariates.size();
  for (const auto* r : rows)
    if (r->covariates.size() != p)
      throw std::invalid_argument("panel: covariate count varies within cluster " +
                                  cluster);
  return p;
}

// Post-indicator coefficient from one cluster's data.
double fit_cluster(const PanelData& panel, const ClusterBlock& block) {
  const size_t p = covariate_count(block.rows, block.cluster);

  std::set<std::string> units;
  std::set<int> times;
  bool any_pre = false, any_post = false;
  for (const auto* r : block.rows) {
    units.insert(r->unit);
    times.insert(r->time);
    (panel.is_post(r->time) ? any_post : any_pre) = true;
  }
  if (!any_pre || !any_post)
    throw std::invalid_argument("panel: cluster " + block.cluster +
                                " lacks pre or post observations");

  const long n = static_cast<long>(block.rows.size());

  if (units.size() <= 1) {
    // Aggregated cluster-by-time series: outcome on constant + post (+ X).
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, 2 + p);
    for (long i = 0; i < n; ++i) {
      const auto* r = block.rows[i];
      y[i] = r->outcome;
      X(i, 0) = 1.0;
      X(i, 1) = panel.is_post(r->time) ? 1.0 : 0.0;
      for (size_t j = 0; j < p; ++j) X(i, 2 + j) = r->covariates[j];
    }
    return ols(y, X)[1];
  }

  if (times.size() == 2) {
    // Individual-level two-period panel with unit fixed effects: first
    // differences within unit, then theta is the intercept of the
    // differenced regression.
    const int t0 = *times.begin(), t1 = *times.rbegin();
    std::map<std::string, std::pair<const PanelRow*, const PanelRow*>> by_unit;
    for (const auto* r : block.rows) {
      auto& pr = by_unit[r->unit];
      (r->time == t0 ? pr.first : pr.second) = r;
    }
    std::vector<const PanelRow*> pre, post;
    for (const auto& [u, pr] : by_unit) {
      if (pr.first && pr.second) {
        pre.push_back(pr.first);
        post.push_back(pr.second);
      }
    }
    const long m = static_cast<long>(pre.size());
    if (m == 0)
      throw std::invalid_argument("panel: cluster " + block.cluster +
                                  " has no unit observed in both periods");
    Eigen::VectorXd dy(m);
    Eigen::MatrixXd X(m, 1 + p);
    for (long i = 0; i < m; ++i) {
      dy[i] = post[i]->outcome - pre[i]->outcome;
      X(i, 0) = 1.0;
      for (size_t j = 0; j < p; ++j)
        X(i, 1 + j) = post[i]->covariates[j] - pre[i]->covariates[j];
    }
    return ols(dy, X)[0];
  }

  // Multi-period individual panel: absorb unit fixed effects by demeaning
  // within unit, then regress on the demeaned post indicator (+ X).
  std::map<std::string, std::vector<const PanelRow*>> by_unit;
  for (const auto* r : block.rows) by_unit[r->unit].push_back(r);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, 1 + p);
  long i = 0;
  for (const auto& [u, rows] : by_unit) {
    const long m = static_cast<long>(rows.size());
    double ybar = 0.0, postbar = 0.0;
    std::vector<double> xbar(p, 0.0);
    for (const auto* r : rows) {
      ybar += r->outcome;
      postbar += panel.is_post(r->time) ? 1.0 : 0.0;
      for (size_t j = 0; j < p; ++j) xbar[j] += r->covariates[j];
    }
    ybar /= m;
    postbar /= m;
    for (auto& v : xbar) v /= m;
    for (const auto* r : rows) {
      y[i] = r->outcome - ybar;
      X(i, 0) = (panel.is_post(r->time) ? 1.0 : 0.0) - postbar;
      for (size_t j = 0; j < p; ++j) X(i, 1 + j) = r->covariates[j] - xbar[j];
      ++i;
    }
  }
  return ols(y, X)[0];
}

}  // namespace

EstimateVector did_cluster_estimates(const PanelData& panel) {
  const auto blocks = group_by_cluster(panel);
  bool treated_seen = false;
  std::vector<double> controls;
  std::vector<std::string> control_labels;
  double treated_value = 0.0;
  for (const auto& b : blocks) {
    const double theta = fit_cluster(panel, b);
    if (b.cluster == panel.treated_cluster) {
      treated_seen = true;
      treated_value = theta;
    } else {
      controls.push_back(theta);
      control_labels.push_back(b.cluster);
    }
  }
  if (!treated_seen)
    throw std::invalid_argument("panel: treated cluster '" +
                                panel.treated_cluster + "' not present");
  EstimateVector x;
  x.treated = treated_value;
  x.controls = Eigen::Map<Eigen::VectorXd>(controls.data(),
                                           static_cast<long>(controls.size()));
  x.labels.push_back(panel.treated_cluster);
  x.labels.insert(x.labels.end(), control_labels.begin(), control_labels.end());
  return x;
}

EstimateVector cluster_treatment_estimates(const CrossSectionData& data) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const CrossSectionRow*>> by_cluster;
  for (const auto& r : data.rows) {
    if (!by_cluster.count(r.cluster)) order.push_back(r.cluster);
    by_cluster[r.cluster].push_back(&r);
  }
  if (!by_cluster.count(data.treated_cluster))
    throw std::invalid_argument("cross-section: treated cluster '" +
                                data.treated_cluster + "' not present");

  double treated_value = 0.0;
  std::vector<double> controls;
  std::vector<std::string> control_labels;
  for (const auto& cluster : order) {
    const auto& rows = by_cluster[cluster];
    const size_t p = rows.front()->covariates.size();
    for (const auto* r : rows)
      if (r->covariates.size() != p)
        throw std::invalid_argument(
            "cross-section: covariate count varies within cluster " + cluster);
    const long n = static_cast<long>(rows.size());
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, 1 + p);
    for (long i = 0; i < n; ++i) {
      y[i] = rows[i]->outcome;
      X(i, 0) = 1.0;
      for (size_t j = 0; j < p; ++j) X(i, 1 + j) = rows[i]->covariates[j];
    }
    const double theta = ols(y, X)[0];
    if (cluster == data.treated_cluster) {
      treated_value = theta;
    } else {
      controls.push_back(theta);
      control_labels.push_back(cluster);
    }
  }

  EstimateVector x;
  x.treated = treated_value;
  x.controls = Eigen::Map<Eigen::VectorXd>(controls.data(),
                                           static_cast<long>(controls.size()));
  x.labels.push_back(data.treated_cluster);
  x.labels.insert(x.labels.end(), control_labels.begin(), control_labels.end());
  return x;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

PanelData read_panel_csv(const std::string& path,
                         const std::string& treated_cluster,
                         int first_post_time) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "unit" || header[1] != "cluster" ||
      header[2] != "time" || header[3] != "outcome")
    throw std::runtime_error(path +
                             ": expected header unit,cluster,time,outcome[,x...]");
  PanelData panel;
  panel.treated_cluster = treated_cluster;
  panel.first_post_time = first_post_time;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size())
      throw std::runtime_error(path + ": ragged row: " + line);
    PanelRow r;
    r.unit = f[0];
    r.cluster = f[1];
    r.time = std::stoi(f[2]);
    r.outcome = std::stod(f[3]);
    for (size_t j = 4; j < f.size(); ++j) r.covariates.push_back(std::stod(f[j]));
    panel.rows.push_back(std::move(r));
  }
  return panel;
}

CrossSectionData read_cross_section_csv(const std::string& path,
                                        const std::string& treated_cluster) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "unit" || header[1] != "cluster" ||
      header[2] != "outcome")
    throw std::runtime_error(path +
                             ": expected header unit,cluster,outcome[,x...]");
  CrossSectionData data;
  data.treated_cluster = treated_cluster;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size())
      throw std::runtime_error(path + ": ragged row: " + line);
    CrossSectionRow r;
    r.unit = f[0];
    r.cluster = f[1];
    r.outcome = std::stod(f[2]);
    for (size_t j = 3; j < f.size(); ++j) r.covariates.push_back(std::stod(f[j]));
    data.rows.push_back(std::move(r));
  }
  return data;
}

}  // namespace rearrange
