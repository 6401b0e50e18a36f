// Command-line front end: weight tables, size bounds, test decisions,
// robustness scans, the baseline comparison test, and the simulation harness.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rearrange/conley_taber.hpp"
#include "rearrange/estimators.hpp"
#include "rearrange/monte_carlo.hpp"
#include "rearrange/numerics.hpp"
#include "rearrange/size_bound.hpp"
#include "rearrange/test_engine.hpp"
#include "rearrange/weights.hpp"

namespace {

using namespace rearrange;

// Accepts comma-separated values where each token may be "lo..hi" (step 1).
std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dots = tok.find("..");
    if (dots != std::string::npos) {
      const double lo = std::stod(tok.substr(0, dots));
      const double hi = std::stod(tok.substr(dots + 2));
      for (double v = lo; v <= hi + 1e-9; v += 1.0) out.push_back(v);
    } else {
      out.push_back(std::stod(tok));
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

Direction parse_direction(const std::string& s) {
  if (s == "upper") return Direction::upper;
  if (s == "lower") return Direction::lower;
  if (s == "two-sided") return Direction::two_sided;
  throw CLI::ValidationError("--direction must be upper, lower, or two-sided");
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write " + tmp);
    os << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot replace " + path);
}

EstimateVector load_estimates(const std::string& in, const std::string& treated,
                              int post_from, bool have_post_from) {
  if (!treated.empty() && have_post_from) {
    const PanelData panel = read_panel_csv(in, treated, post_from);
    return did_cluster_estimates(panel);
  }
  if (!treated.empty()) {
    const CrossSectionData cs = read_cross_section_csv(in, treated);
    return cluster_treatment_estimates(cs);
  }
  return read_estimates_csv(in);
}

int cmd_weights(const std::string& alpha_s, const std::string& rho_s,
                const std::string& q_s, const std::string& out) {
  const auto alphas = parse_list(alpha_s);
  const auto rhos = parse_list(rho_s);
  const auto qs = parse_int_list(q_s);
  for (double a : alphas)
    if (!(a > 0.0 && a < 0.5)) {
      std::cerr << "error: alpha " << a << " outside (0,0.5)\n";
      return 1;
    }
  const WeightTable table = generate_table(alphas, rhos, qs);
  std::ostringstream os;
  write_weight_table(os, table);
  if (!out.empty()) {
    write_file_atomic(out, os.str());
    int feasible = 0;
    for (const auto& r : table.rows)
      if (r.w) ++feasible;
    std::cout << "wrote " << table.rows.size() << " rows (" << feasible
              << " feasible) to " << out << "\n";
  } else {
    std::cout << os.str();
  }
  return 0;
}

int cmd_bound(int q, double w, double rho) {
  const BoundComponents b = size_bound(q, w, rho);
  std::printf("q=%d w=%.6f rho=%.6f\n", q, w, rho);
  std::printf("escape_term=%.6f\n", b.escape_term);
  std::printf("oracle_integral=%.6f\n", b.oracle_integral);
  std::printf("centering_adjustment=%.6f\n", b.centering_adjustment);
  std::printf("total=%.6f\n", b.total);
  return 0;
}

int cmd_test(const std::string& in, const std::string& treated, int post_from,
             bool have_post_from, double alpha, double rho,
             const std::string& direction_s, double shift) {
  const Direction dir = parse_direction(direction_s);
  const EstimateVector x = load_estimates(in, treated, post_from, have_post_from);
  const TestDecision d = run_test(x, alpha, rho, dir, shift);
  if (!d.feasible) {
    std::cerr << "infeasible combination (alpha=" << d.alpha_used
              << ", rho=" << rho << ", q=" << x.q()
              << "); see weight table\n";
    return 2;
  }
  std::printf("q=%d\n", x.q());
  std::printf("alpha=%.6f\n", d.alpha);
  std::printf("alpha_used=%.6f\n", d.alpha_used);
  std::printf("rho=%.6f\n", d.rho);
  std::printf("w=%.6f\n", d.w_used);
  std::printf("shift=%.6f\n", d.shift);
  std::printf("delta_hat=%.6f\n", d.delta);
  std::printf("min_weighted_pair=%.6f\n", d.min_weighted_pair);
  std::printf("max_recentered_control=%.6f\n", d.max_recentered_control);
  std::printf("reject=%d\n", d.reject ? 1 : 0);
  std::printf("%s at level %g (%s)\n", d.reject ? "REJECT" : "no rejection",
              d.alpha, direction_s.c_str());
  return 0;
}

int cmd_robustness(const std::string& in, const std::string& treated,
                   int post_from, bool have_post_from, double alpha,
                   const std::string& direction_s, double rho_max) {
  const Direction dir = parse_direction(direction_s);
  const EstimateVector x = load_estimates(in, treated, post_from, have_post_from);
  const auto r = robustness_rho(x, alpha, dir, rho_max);
  if (!r) {
    std::printf("rho_star=x\n");
    std::printf("no rejection at any rho\n");
    return 0;
  }
  std::printf("rho_star=%.3f\n", r->rho);
  std::printf("rho_star_squared=%.6f\n", r->rho * r->rho);
  if (r->saturated)
    std::printf("warning: still rejecting at rho-max=%.3f\n", rho_max);
  return 0;
}

int cmd_ct_test(const std::string& in, const std::string& treated,
                int post_from, double alpha) {
  const PanelData panel = read_panel_csv(in, treated, post_from);
  const CTResult r = conley_taber_test(panel, alpha);
  std::printf("delta_hat=%.6f\n", r.delta_hat);
  std::printf("critical_value=%.6f\n", r.critical_value);
  std::printf("reject=%d\n", r.reject ? 1 : 0);
  std::printf("%s at level %g\n", r.reject ? "REJECT" : "no rejection", alpha);
  return 0;
}

int cmd_simulate(const std::string& sigma_s, const std::string& delta_s,
                 const std::string& gamma_s, const std::string& q_s,
                 const std::string& innovation_s, const std::string& methods_s,
                 double alpha, double rho, int periods, int post_periods,
                 long reps, std::uint64_t seed, const std::string& out) {
  SimGrid grid;
  grid.sigma_treated = parse_list(sigma_s);
  grid.delta = parse_list(delta_s);
  grid.gamma = parse_list(gamma_s);
  grid.q = parse_int_list(q_s);
  grid.innovation.clear();
  {
    std::stringstream ss(innovation_s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "gaussian")
        grid.innovation.push_back(Innovation::gaussian);
      else if (tok == "chi2")
        grid.innovation.push_back(Innovation::centered_chi2_2);
      else
        throw CLI::ValidationError("--innovation must be gaussian or chi2");
    }
  }
  grid.base.periods = periods;
  grid.base.post_periods = post_periods;

  std::vector<SimMethod> methods;
  {
    std::stringstream ss(methods_s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "rearrangement")
        methods.push_back(SimMethod::rearrangement(alpha, rho));
      else if (tok == "ct")
        methods.push_back(SimMethod::conley_taber(alpha));
      else
        throw CLI::ValidationError("--methods tokens must be rearrangement or ct");
    }
  }

  const auto results = run_grid(grid, methods, reps, seed);
  std::ostringstream os;
  write_sim_results(os, results);
  if (!out.empty()) {
    write_file_atomic(out, os.str());
    std::cout << "wrote " << results.size() << " cells to " << out << "\n";
  } else {
    std::cout << os.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rearrangement test for inference with a single treated cluster"};
  app.require_subcommand(1);

  // weights
  auto* sw = app.add_subcommand("weights", "Generate a weight table");
  std::string w_alpha = "0.05", w_rho = "2..9", w_q = "10,15,20,25,30,35,40,45,49";
  std::string w_out;
  sw->add_option("--alpha", w_alpha, "alpha values (comma list)");
  sw->add_option("--rho", w_rho, "rho values (comma list or lo..hi)");
  sw->add_option("--q", w_q, "q values (comma list or lo..hi)");
  sw->add_option("--out", w_out, "output file (stdout if omitted)");

  // bound
  auto* sb = app.add_subcommand("bound", "Evaluate the size bound");
  int b_q = 20;
  double b_w = 0.5, b_rho = 2.0;
  sb->add_option("--q", b_q)->required();
  sb->add_option("--w", b_w)->required();
  sb->add_option("--rho", b_rho)->required();

  // test
  auto* st = app.add_subcommand("test", "Run the rearrangement test");
  std::string t_in, t_treated, t_direction = "upper";
  int t_post_from = 0;
  double t_alpha = 0.05, t_rho = 2.0, t_shift = 0.0;
  st->add_option("--in", t_in, "estimates, panel, or cross-section CSV")->required();
  st->add_option("--treated", t_treated, "treated cluster id (panel/cross-section input)");
  auto* t_pf = st->add_option("--post-from", t_post_from, "first post-intervention time (panel input)");
  st->add_option("--alpha", t_alpha);
  st->add_option("--rho", t_rho);
  st->add_option("--direction", t_direction, "upper, lower, or two-sided");
  st->add_option("--shift", t_shift, "tested effect under a shifted null");

  // robustness
  auto* sr = app.add_subcommand("robustness", "Largest rho that still rejects");
  std::string r_in, r_treated, r_direction = "upper";
  int r_post_from = 0;
  double r_alpha = 0.05, r_rho_max = 10.0;
  sr->add_option("--in", r_in)->required();
  sr->add_option("--treated", r_treated);
  auto* r_pf = sr->add_option("--post-from", r_post_from);
  sr->add_option("--alpha", r_alpha);
  sr->add_option("--direction", r_direction);
  sr->add_option("--rho-max", r_rho_max);

  // ct-test
  auto* sc = app.add_subcommand("ct-test", "Conley-Taber comparison test");
  std::string c_in, c_treated;
  int c_post_from = 0;
  double c_alpha = 0.05;
  sc->add_option("--in", c_in)->required();
  sc->add_option("--treated", c_treated)->required();
  sc->add_option("--post-from", c_post_from)->required();
  sc->add_option("--alpha", c_alpha);

  // simulate
  auto* ss = app.add_subcommand("simulate", "Monte Carlo size/power harness");
  std::string s_sigma = "1", s_delta = "0", s_gamma = "0.5", s_q = "50";
  std::string s_innovation = "gaussian", s_methods = "rearrangement", s_out;
  double s_alpha = 0.05, s_rho = 2.0;
  int s_periods = 10, s_post_periods = 4;
  long s_reps = 10000;
  std::uint64_t s_seed = 1;
  ss->add_option("--sigma", s_sigma, "treated-cluster scale grid");
  ss->add_option("--delta", s_delta, "treatment effect grid");
  ss->add_option("--gamma", s_gamma, "AR(1) coefficient grid");
  ss->add_option("--q", s_q, "control cluster count grid");
  ss->add_option("--innovation", s_innovation, "gaussian and/or chi2");
  ss->add_option("--methods", s_methods, "rearrangement and/or ct");
  ss->add_option("--alpha", s_alpha);
  ss->add_option("--rho", s_rho);
  ss->add_option("--periods", s_periods);
  ss->add_option("--post-periods", s_post_periods);
  ss->add_option("--reps", s_reps);
  ss->add_option("--seed", s_seed);
  ss->add_option("--out", s_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sw->parsed()) return cmd_weights(w_alpha, w_rho, w_q, w_out);
    if (sb->parsed()) return cmd_bound(b_q, b_w, b_rho);
    if (st->parsed())
      return cmd_test(t_in, t_treated, t_post_from, t_pf->count() > 0, t_alpha,
                      t_rho, t_direction, t_shift);
    if (sr->parsed())
      return cmd_robustness(r_in, r_treated, r_post_from, r_pf->count() > 0,
                            r_alpha, r_direction, r_rho_max);
    if (sc->parsed()) return cmd_ct_test(c_in, c_treated, c_post_from, c_alpha);
    if (ss->parsed())
      return cmd_simulate(s_sigma, s_delta, s_gamma, s_q, s_innovation,
                          s_methods, s_alpha, s_rho, s_periods, s_post_periods,
                          s_reps, s_seed, s_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
