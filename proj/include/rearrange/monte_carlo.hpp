#ifndef REARRANGE_MONTE_CARLO_HPP
#define REARRANGE_MONTE_CARLO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rearrange/estimators.hpp"
#include "rearrange/test_engine.hpp"

namespace rearrange {

enum class Innovation { gaussian, centered_chi2_2 };

const char* innovation_name(Innovation v);

// Two-way fixed effects DGP at the cluster level with AR(1) errors. The
// treated cluster is the last one and its innovations are scaled by
// sigma_treated.
struct DgpConfig {
  int q = 50;             // control clusters
  int periods = 10;
  int post_periods = 4;
  double gamma = 0.5;     // AR(1) coefficient, |gamma| < 1
  double sigma_treated = 1.0;
  double delta = 0.0;
  Innovation innovation = Innovation::gaussian;
  std::vector<double> eta;   // time effects, default all zero
  std::vector<double> zeta;  // cluster effects, default all zero
};

struct SimMethod {
  enum class Kind { rearrangement, conley_taber } kind = Kind::rearrangement;
  double alpha = 0.05;
  double rho = 2.0;                         // rearrangement only
  Direction direction = Direction::upper;   // rearrangement only

  static SimMethod rearrangement(double alpha, double rho,
                                 Direction dir = Direction::upper) {
    return {Kind::rearrangement, alpha, rho, dir};
  }
  static SimMethod conley_taber(double alpha) {
    return {Kind::conley_taber, alpha, 0.0, Direction::upper};
  }
  std::string name() const;
};

struct SimResult {
  std::string method;
  DgpConfig cfg;
  double alpha = 0.0;
  double rho = 0.0;
  long replications = 0;
  double reject_rate = 0.0;
  double mc_se = 0.0;  // sqrt(r (1-r) / replications)
  std::uint64_t master_seed = 0;
};

// Deterministic per-replication seed derivation (splitmix64-based); fixed
// forever for reproducibility.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell,
                          std::uint64_t replication);

// One draw from the DGP as a long-format panel (unit == cluster, aggregated
// series). Deterministic given (cfg, seed).
PanelData simulate_panel(const DgpConfig& cfg, std::uint64_t seed);

// Rejection rates for one or more methods evaluated on identical draws.
std::vector<SimResult> rejection_rates(const DgpConfig& cfg,
                                       const std::vector<SimMethod>& methods,
                                       long replications,
                                       std::uint64_t master_seed,
                                       std::uint64_t cell = 0,
                                       int workers = 0);

SimResult rejection_rate(const DgpConfig& cfg, const SimMethod& method,
                         long replications, std::uint64_t master_seed,
                         std::uint64_t cell = 0, int workers = 0);

struct SimGrid {
  std::vector<double> sigma_treated = {1.0};
  std::vector<double> delta = {0.0};
  std::vector<double> gamma = {0.5};
  std::vector<int> q = {50};
  std::vector<Innovation> innovation = {Innovation::gaussian};
  DgpConfig base;  // periods/post_periods/eta/zeta taken from here
};

std::vector<SimResult> run_grid(const SimGrid& grid,
                                const std::vector<SimMethod>& methods,
                                long replications, std::uint64_t master_seed,
                                int workers = 0);

// Output file: header
// method,q,gamma,sigma,delta,innovation,alpha,rho,replications,reject_rate,mc_se,master_seed
void write_sim_results(std::ostream& os, const std::vector<SimResult>& results);

}  // namespace rearrange

#endif
