#include "rearrange/test_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rearrange/numerics.hpp"
#include "rearrange/weights.hpp"

namespace rearrange {

void validate_estimates(const EstimateVector& x) {
  const int q = x.q();
  if (q < 2) throw std::invalid_argument("estimates: need at least 2 controls");
  std::vector<double> c(x.controls.data(), x.controls.data() + q);
  std::sort(c.begin(), c.end());
  int coinciding_pairs = 0;
  for (int i = 1; i < q; ++i)
    if (c[i] == c[i - 1]) ++coinciding_pairs;
  if (coinciding_pairs > 1)
    throw std::invalid_argument(
        "estimates: more than one pair of control estimates coincides "
        "exactly; the test allows at most one degenerate control");
}

SVector build_s(const EstimateVector& x, double w) {
  if (!(w > 0.0 && w < 1.0))
    throw std::invalid_argument("build_s: w outside (0,1)");
  const int q = x.q();
  const double mean0 = x.controls.mean();
  const double d = x.treated - mean0;
  SVector s(q + 2);
  s[0] = (1.0 + w) * d;
  s[1] = (1.0 - w) * d;
  s.tail(q) = x.controls.array() - mean0;
  return s;
}

double t_stat(const SVector& s) {
  const auto n = s.size();
  if (n < 4) throw std::invalid_argument("t_stat: need at least 4 entries");
  return 0.5 * (s[0] + s[1]) - s.tail(n - 2).mean();
}

SVector rearrange_desc(const SVector& s) {
  SVector out = s;
  std::stable_sort(out.data(), out.data() + out.size(),
                   [](double a, double b) { return a > b; });
  return out;
}

bool reject_upper(const EstimateVector& x, double w) {
  if (!(w > 0.0 && w < 1.0))
    throw std::invalid_argument("reject_upper: w outside (0,1)");
  const double mean0 = x.controls.mean();
  const double d = x.treated - mean0;
  const double pair = std::min((1.0 + w) * d, (1.0 - w) * d);
  const double maxc = x.controls.maxCoeff() - mean0;
  return pair > maxc;
}

namespace {

EstimateVector shifted(const EstimateVector& x, double shift) {
  EstimateVector y = x;
  y.treated -= shift;
  return y;
}

EstimateVector negated(const EstimateVector& x) {
  EstimateVector y = x;
  y.treated = -y.treated;
  y.controls = -y.controls;
  return y;
}

void fill_diag(TestDecision& d, const EstimateVector& x, double w) {
  const double mean0 = x.controls.mean();
  d.delta = x.treated - mean0;
  d.max_recentered_control = x.controls.maxCoeff() - mean0;
  d.min_weighted_pair = std::min((1.0 + w) * d.delta, (1.0 - w) * d.delta);
}

}  // namespace

TestDecision run_test(const EstimateVector& x, double alpha, double rho,
                      Direction direction, double shift) {
  validate_estimates(x);
  TestDecision d;
  d.direction = direction;
  d.alpha = alpha;
  d.rho = rho;
  d.shift = shift;
  d.alpha_used = direction == Direction::two_sided ? alpha / 2.0 : alpha;

  const auto w = test_weight({d.alpha_used, rho, x.q()});
  if (!w) return d;  // infeasible combination
  d.feasible = true;
  d.w_used = *w;

  const EstimateVector xs = shifted(x, shift);
  switch (direction) {
    case Direction::upper:
      d.reject = reject_upper(xs, *w);
      fill_diag(d, xs, *w);
      break;
    case Direction::lower: {
      const EstimateVector xn = negated(xs);
      d.reject = reject_upper(xn, *w);
      fill_diag(d, xn, *w);
      break;
    }
    case Direction::two_sided:
      d.reject = reject_upper(xs, *w) || reject_upper(negated(xs), *w);
      fill_diag(d, xs, *w);
      break;
  }
  return d;
}

std::optional<RobustnessResult> robustness_rho(const EstimateVector& x,
                                               double alpha,
                                               Direction direction,
                                               double rho_max, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("robustness_rho: step <= 0");
  const long n = static_cast<long>(std::floor(rho_max / step + 1e-9));
  if (n < 1) return std::nullopt;

  auto rejects = [&](long i) {
    const TestDecision d = run_test(x, alpha, i * step, direction);
    return d.feasible && d.reject;
  };

  if (!rejects(1)) return std::nullopt;
  if (rejects(n)) return RobustnessResult{n * step, true};

  // Rejection is monotone in rho: binary search for the boundary.
  long lo = 1, hi = n;  // rejects(lo), !rejects(hi)
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (rejects(mid))
      lo = mid;
    else
      hi = mid;
  }
  return RobustnessResult{lo * step, false};
}

double power_lower_bound(const PowerBoundInput& inp) {
  if (!(inp.delta > 0.0)) throw std::invalid_argument("power bound: delta <= 0");
  if (!(inp.sigma_treated > 0.0) || (inp.sigma_controls.array() <= 0.0).any())
    throw std::invalid_argument("power bound: scales must be positive");
  if (!(inp.w > 0.0 && inp.w < 1.0))
    throw std::invalid_argument("power bound: w outside (0,1)");

  const int q = static_cast<int>(inp.sigma_controls.size());
  const double ratio = (1.0 + inp.w) / (1.0 - inp.w);
  const double snr = inp.delta / inp.sigma_treated;
  auto g = [&](double t) {
    double p = std_normal_cdf(snr - ratio * t);
    for (int k = 0; k < q; ++k)
      p *= std_normal_cdf(inp.sigma_treated / inp.sigma_controls[k] * t) - 0.5;
    return p;
  };

  // Supremum is attained on (0, inf); geometric scan then golden section.
  const double lo = 1e-8, hi = 100.0;
  const int n = 1000;
  const double r = std::pow(hi / lo, 1.0 / n);
  double best_t = lo, best_g = g(lo), prev = lo, cur = lo;
  double blo = lo, bhi = hi;
  for (int i = 0; i <= n; ++i) {
    const double gi = g(cur);
    if (gi > best_g) {
      best_g = gi;
      best_t = cur;
      blo = prev;
      bhi = std::min(hi, cur * r);
    }
    prev = cur;
    cur *= r;
  }
  const ScalarResult m =
      minimize_scalar([&](double t) { return -g(t); }, blo, bhi, {1e-10, 0.0, 200});
  const double sup = std::max(best_g, -m.value);
  return std::min(1.0, std::ldexp(sup, q));
}

EstimateVector read_estimates_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(is, line) || line != "cluster,estimate,treated")
    throw std::runtime_error(path + ": expected header cluster,estimate,treated");

  std::string treated_label;
  double treated_value = 0.0;
  int n_treated = 0;
  std::vector<std::string> labels;
  std::vector<double> controls;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cluster, estimate, treated;
    std::getline(ss, cluster, ',');
    std::getline(ss, estimate, ',');
    std::getline(ss, treated, ',');
    const double v = std::stod(estimate);
    if (treated == "1") {
      ++n_treated;
      treated_label = cluster;
      treated_value = v;
    } else if (treated == "0") {
      labels.push_back(cluster);
      controls.push_back(v);
    } else {
      throw std::runtime_error(path + ": treated flag must be 0 or 1");
    }
  }
  if (n_treated != 1)
    throw std::runtime_error(path + ": exactly one treated=1 row required");

  EstimateVector x;
  x.treated = treated_value;
  x.controls = Eigen::Map<Eigen::VectorXd>(controls.data(),
                                           static_cast<long>(controls.size()));
  x.labels.push_back(treated_label);
  x.labels.insert(x.labels.end(), labels.begin(), labels.end());
  return x;
}

}  // namespace rearrange
