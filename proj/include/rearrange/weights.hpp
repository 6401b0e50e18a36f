#ifndef REARRANGE_WEIGHTS_HPP
#define REARRANGE_WEIGHTS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rearrange/size_bound.hpp"

namespace rearrange {

struct WeightSpec {
  double alpha = 0.05;
  double rho = 2.0;
  int q = 0;
};

struct WeightRow {
  double alpha = 0.0;
  double rho = 0.0;
  int q = 0;
  std::optional<double> w;  // present iff grade != infeasible
  TightnessGrade grade;
};

struct WeightTable {
  std::vector<WeightRow> rows;

  const WeightRow* find(const WeightSpec& spec) const;
};

// Smallest w in (0,1) with xi_q(w, rho) = alpha: scan at step 1e-3 for the
// first sign change of xi - alpha, then bisection to 1e-6. Absent when the
// equation has no solution.
std::optional<double> weight(const WeightSpec& spec);

// Weight used by the test decision. Equals weight(spec) when the equation
// xi = alpha has a solution. When xi stays below alpha on the whole scan
// grid, size is controlled for every w and the smallest scan weight is used
// (this happens for small rho during robustness scans). Absent only when the
// bound exceeds alpha everywhere.
std::optional<double> test_weight(const WeightSpec& spec);

// One row per (alpha, rho, q) triple, graded; canonical sort by
// (alpha desc, rho asc, q asc) as in the reference table layout.
WeightTable generate_table(const std::vector<double>& alphas,
                           const std::vector<double>& rhos,
                           const std::vector<int>& qs);

// Exact-match lookup; falls back to computation on a miss.
std::optional<double> lookup(const WeightTable& table, const WeightSpec& spec);

// Comma-separated persistence, header alpha,rho,q,weight,grade; an empty
// weight field encodes infeasibility.
void write_weight_table(std::ostream& os, const WeightTable& table);
void write_weight_table_file(const std::string& path, const WeightTable& table);
WeightTable read_weight_table(std::istream& is);
WeightTable read_weight_table_file(const std::string& path);

// User cache: whole-file replace on write so concurrent runs never see
// partial rows. Path from REARRANGE_CACHE or the default below.
std::string weight_cache_path();
std::optional<double> cached_weight(const WeightSpec& spec);

// The grid the shipped default table covers.
const std::vector<double>& default_table_alphas();
const std::vector<double>& default_table_rhos();
const std::vector<int>& default_table_qs();

}  // namespace rearrange

#endif
