#include "rearrange/monte_carlo.hpp"

#include <cmath>
#include <future>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "rearrange/conley_taber.hpp"
#include "rearrange/weights.hpp"

namespace rearrange {

const char* innovation_name(Innovation v) {
  return v == Innovation::gaussian ? "gaussian" : "centered_chi2_2";
}

std::string SimMethod::name() const {
  return kind == Kind::rearrangement ? "rearrangement" : "conley_taber";
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate(const DgpConfig& cfg) {
  if (cfg.q < 1) throw std::invalid_argument("dgp: q < 1");
  if (!(cfg.post_periods > 0 && cfg.post_periods < cfg.periods))
    throw std::invalid_argument("dgp: need 0 < post_periods < periods");
  if (!(std::abs(cfg.gamma) < 1.0)) throw std::invalid_argument("dgp: |gamma| >= 1");
  if (cfg.sigma_treated < 0.0)
    throw std::invalid_argument("dgp: sigma_treated < 0");
  if (!cfg.eta.empty() && static_cast<int>(cfg.eta.size()) != cfg.periods)
    throw std::invalid_argument("dgp: eta length != periods");
  if (!cfg.zeta.empty() && static_cast<int>(cfg.zeta.size()) != cfg.q + 1)
    throw std::invalid_argument("dgp: zeta length != q+1");
}

// Unit-variance, mean-zero innovation draw.
double draw_innovation(Innovation kind, std::mt19937_64& rng) {
  if (kind == Innovation::gaussian) {
    std::normal_distribution<double> n01(0.0, 1.0);
    return n01(rng);
  }
  // (chi^2_2 - 2)/2: mean 0, variance 1.
  std::normal_distribution<double> n01(0.0, 1.0);
  const double a = n01(rng), b = n01(rng);
  return 0.5 * (a * a + b * b - 2.0);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell,
                          std::uint64_t replication) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ (0xA24BAED4963EE407ULL * (cell + 1)));
  s = splitmix64(s ^ (0x9FB21C651E98DF25ULL * (replication + 1)));
  return s;
}

PanelData simulate_panel(const DgpConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  std::mt19937_64 rng(seed);
  const int nclust = cfg.q + 1;
  const int first_post = cfg.periods - cfg.post_periods + 1;

  PanelData panel;
  panel.first_post_time = first_post;
  panel.rows.reserve(static_cast<size_t>(nclust) * cfg.periods);

  for (int k = 0; k < nclust; ++k) {
    const bool treated = k == nclust - 1;
    const double scale = treated ? cfg.sigma_treated : 1.0;
    const std::string label = treated ? "treated" : "c" + std::to_string(k + 1);
    if (treated) panel.treated_cluster = label;

    double u;
    if (cfg.innovation == Innovation::gaussian) {
      // Start from the stationary law N(0, scale^2 / (1 - gamma^2)).
      std::normal_distribution<double> init(
          0.0, scale / std::sqrt(1.0 - cfg.gamma * cfg.gamma));
      u = init(rng);
    } else {
      // No closed-form stationary law; burn in for 100 periods.
      u = 0.0;
      for (int t = 0; t < 100; ++t)
        u = cfg.gamma * u + scale * draw_innovation(cfg.innovation, rng);
    }

    for (int t = 1; t <= cfg.periods; ++t) {
      if (t > 1) u = cfg.gamma * u + scale * draw_innovation(cfg.innovation, rng);
      const bool post = t >= first_post;
      double y = u;
      if (treated && post) y += cfg.delta;
      if (!cfg.eta.empty()) y += cfg.eta[t - 1];
      if (!cfg.zeta.empty()) y += cfg.zeta[k];
      panel.rows.push_back({label, label, t, y, {}});
    }
  }
  return panel;
}

std::vector<SimResult> rejection_rates(const DgpConfig& cfg,
                                       const std::vector<SimMethod>& methods,
                                       long replications,
                                       std::uint64_t master_seed,
                                       std::uint64_t cell, int workers) {
  validate(cfg);
  if (replications < 100)
    throw std::invalid_argument("rejection_rates: need >= 100 replications");

  // Resolve rearrangement weights up front; an infeasible (alpha, rho, q)
  // combination fails before any simulation.
  std::vector<double> wts(methods.size(), 0.0);
  for (size_t m = 0; m < methods.size(); ++m) {
    if (methods[m].kind != SimMethod::Kind::rearrangement) continue;
    const double a = methods[m].direction == Direction::two_sided
                         ? methods[m].alpha / 2.0
                         : methods[m].alpha;
    const auto w = test_weight({a, methods[m].rho, cfg.q});
    if (!w)
      throw std::invalid_argument(
          "rejection_rates: infeasible (alpha, rho, q) combination");
    wts[m] = *w;
  }

  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  auto run_range = [&](long begin, long end) {
    std::vector<long> counts(methods.size(), 0);
    for (long i = begin; i < end; ++i) {
      const PanelData panel =
          simulate_panel(cfg, derive_seed(master_seed, cell, i));
      EstimateVector est;
      bool have_est = false;
      for (size_t m = 0; m < methods.size(); ++m) {
        bool rej = false;
        if (methods[m].kind == SimMethod::Kind::rearrangement) {
          if (!have_est) {
            est = did_cluster_estimates(panel);
            have_est = true;
          }
          switch (methods[m].direction) {
            case Direction::upper:
              rej = reject_upper(est, wts[m]);
              break;
            case Direction::lower: {
              EstimateVector neg = est;
              neg.treated = -neg.treated;
              neg.controls = -neg.controls;
              rej = reject_upper(neg, wts[m]);
              break;
            }
            case Direction::two_sided: {
              EstimateVector neg = est;
              neg.treated = -neg.treated;
              neg.controls = -neg.controls;
              rej = reject_upper(est, wts[m]) || reject_upper(neg, wts[m]);
              break;
            }
          }
        } else {
          rej = conley_taber_test(panel, methods[m].alpha).reject;
        }
        if (rej) ++counts[m];
      }
    }
    return counts;
  };

  std::vector<long> counts(methods.size(), 0);
  if (workers == 1) {
    counts = run_range(0, replications);
  } else {
    std::vector<std::future<std::vector<long>>> futs;
    const long chunk = (replications + workers - 1) / workers;
    for (long b = 0; b < replications; b += chunk)
      futs.push_back(std::async(std::launch::async, run_range, b,
                                std::min(b + chunk, replications)));
    for (auto& f : futs) {
      const auto c = f.get();
      for (size_t m = 0; m < counts.size(); ++m) counts[m] += c[m];
    }
  }

  std::vector<SimResult> out;
  for (size_t m = 0; m < methods.size(); ++m) {
    SimResult r;
    r.method = methods[m].name();
    r.cfg = cfg;
    r.alpha = methods[m].alpha;
    r.rho = methods[m].kind == SimMethod::Kind::rearrangement ? methods[m].rho : 0.0;
    r.replications = replications;
    r.reject_rate = static_cast<double>(counts[m]) / replications;
    r.mc_se = std::sqrt(r.reject_rate * (1.0 - r.reject_rate) / replications);
    r.master_seed = master_seed;
    out.push_back(std::move(r));
  }
  return out;
}

SimResult rejection_rate(const DgpConfig& cfg, const SimMethod& method,
                         long replications, std::uint64_t master_seed,
                         std::uint64_t cell, int workers) {
  return rejection_rates(cfg, {method}, replications, master_seed, cell,
                         workers)[0];
}

std::vector<SimResult> run_grid(const SimGrid& grid,
                                const std::vector<SimMethod>& methods,
                                long replications, std::uint64_t master_seed,
                                int workers) {
  std::vector<SimResult> out;
  std::uint64_t cell = 0;
  for (int q : grid.q)
    for (double gamma : grid.gamma)
      for (double sigma : grid.sigma_treated)
        for (double delta : grid.delta)
          for (Innovation inn : grid.innovation) {
            DgpConfig cfg = grid.base;
            cfg.q = q;
            cfg.gamma = gamma;
            cfg.sigma_treated = sigma;
            cfg.delta = delta;
            cfg.innovation = inn;
            auto rs = rejection_rates(cfg, methods, replications, master_seed,
                                      cell, workers);
            out.insert(out.end(), rs.begin(), rs.end());
            ++cell;
          }
  return out;
}

void write_sim_results(std::ostream& os, const std::vector<SimResult>& results) {
  os << "method,q,gamma,sigma,delta,innovation,alpha,rho,replications,"
        "reject_rate,mc_se,master_seed\n";
  char buf[64];
  for (const auto& r : results) {
    os << r.method << ',' << r.cfg.q << ',' << r.cfg.gamma << ','
       << r.cfg.sigma_treated << ',' << r.cfg.delta << ','
       << innovation_name(r.cfg.innovation) << ',' << r.alpha << ',' << r.rho
       << ',' << r.replications << ',';
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", r.reject_rate, r.mc_se);
    os << buf << ',' << r.master_seed << '\n';
  }
}

}  // namespace rearrange
