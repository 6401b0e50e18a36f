#include "rearrange/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rearrange/numerics.hpp"

namespace rearrange {

namespace {

constexpr double kScanStep = 1e-3;
constexpr double kScanLo = 1e-3;
constexpr double kScanHi = 0.999;

struct RootScan {
  std::optional<double> root;
  bool all_below = false;  // xi < alpha on the whole grid
};

RootScan scan_for_weight(const WeightSpec& spec) {
  auto f = [&](double w) {
    return size_bound(spec.q, w, spec.rho).total - spec.alpha;
  };
  RootScan out;
  bool any_above = false, any_below = false;
  double prev_w = kScanLo, prev_f = f(prev_w);
  (prev_f < 0.0 ? any_below : any_above) = true;
  for (double w = kScanLo + kScanStep; w <= kScanHi + 0.5 * kScanStep;
       w += kScanStep) {
    const double cw = std::min(w, kScanHi);
    const double fw = f(cw);
    (fw < 0.0 ? any_below : any_above) = true;
    if ((prev_f < 0.0) != (fw < 0.0) || fw == 0.0) {
      auto r = find_smallest_root(f, prev_w, cw, kScanStep, {1e-6, 0.0, 200});
      if (r) {
        out.root = r->x;
        return out;
      }
    }
    prev_w = cw;
    prev_f = fw;
  }
  out.all_below = any_below && !any_above;
  return out;
}

void validate(const WeightSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 0.5))
    throw std::invalid_argument("weight: alpha outside (0,0.5)");
  if (spec.q < 3) throw std::invalid_argument("weight: q < 3");
  if (!(spec.rho > 0.0)) throw std::invalid_argument("weight: rho <= 0");
}

}  // namespace

std::optional<double> weight(const WeightSpec& spec) {
  validate(spec);
  return scan_for_weight(spec).root;
}

std::optional<double> test_weight(const WeightSpec& spec) {
  validate(spec);
  const RootScan s = scan_for_weight(spec);
  if (s.root) return s.root;
  if (s.all_below) return kScanLo;
  return std::nullopt;
}

const WeightRow* WeightTable::find(const WeightSpec& spec) const {
  for (const auto& r : rows) {
    if (r.q == spec.q && std::abs(r.alpha - spec.alpha) < 1e-12 &&
        std::abs(r.rho - spec.rho) < 1e-12)
      return &r;
  }
  return nullptr;
}

WeightTable generate_table(const std::vector<double>& alphas,
                           const std::vector<double>& rhos,
                           const std::vector<int>& qs) {
  WeightTable t;
  for (double a : alphas) {
    for (double r : rhos) {
      for (int q : qs) {
        WeightRow row;
        row.alpha = a;
        row.rho = r;
        row.q = q;
        const auto w = weight({a, r, q});
        if (!w) {
          row.grade = {Grade::infeasible, 1.0};
        } else {
          const BoundComponents b = size_bound(q, *w, r);
          row.grade.slack = b.escape_term + b.centering_adjustment;
          if (row.grade.slack > a / 2.0) {
            row.grade.grade = Grade::infeasible;
          } else {
            row.w = w;
            row.grade.grade =
                row.grade.slack > a / 10.0 ? Grade::loose : Grade::near_tight;
          }
        }
        t.rows.push_back(row);
      }
    }
  }
  // Canonical order: alpha descending, then rho, then q ascending.
  std::sort(t.rows.begin(), t.rows.end(), [](const WeightRow& x, const WeightRow& y) {
    if (x.alpha != y.alpha) return x.alpha > y.alpha;
    if (x.rho != y.rho) return x.rho < y.rho;
    return x.q < y.q;
  });
  return t;
}

std::optional<double> lookup(const WeightTable& table, const WeightSpec& spec) {
  if (const WeightRow* r = table.find(spec)) return r->w;
  return weight(spec);
}

namespace {

std::string format_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

Grade parse_grade(const std::string& s) {
  if (s == "loose") return Grade::loose;
  if (s == "near_tight") return Grade::near_tight;
  return Grade::infeasible;
}

}  // namespace

void write_weight_table(std::ostream& os, const WeightTable& table) {
  os << "alpha,rho,q,weight,grade\n";
  char buf[64];
  for (const auto& r : table.rows) {
    os << format_num(r.alpha) << ',' << format_num(r.rho) << ',' << r.q << ',';
    if (r.w) {
      std::snprintf(buf, sizeof(buf), "%.6f", *r.w);
      os << buf;
    }
    os << ',' << grade_name(r.grade.grade) << '\n';
  }
}

void write_weight_table_file(const std::string& path, const WeightTable& table) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write " + tmp);
    write_weight_table(os, table);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot replace " + path);
}

WeightTable read_weight_table(std::istream& is) {
  WeightTable t;
  std::string line;
  if (!std::getline(is, line)) return t;
  if (line != "alpha,rho,q,weight,grade")
    throw std::runtime_error("weight table: unexpected header: " + line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    WeightRow r;
    std::getline(ss, field, ',');
    r.alpha = std::stod(field);
    std::getline(ss, field, ',');
    r.rho = std::stod(field);
    std::getline(ss, field, ',');
    r.q = std::stoi(field);
    std::getline(ss, field, ',');
    if (!field.empty()) r.w = std::stod(field);
    std::getline(ss, field, ',');
    r.grade.grade = parse_grade(field);
    t.rows.push_back(r);
  }
  return t;
}

WeightTable read_weight_table_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_weight_table(is);
}

std::string weight_cache_path() {
  if (const char* p = std::getenv("REARRANGE_CACHE")) return p;
  return "rearrange_weights_cache.csv";
}

std::optional<double> cached_weight(const WeightSpec& spec) {
  const std::string path = weight_cache_path();
  WeightTable t;
  {
    std::ifstream is(path);
    if (is) t = read_weight_table(is);
  }
  if (const WeightRow* r = t.find(spec)) return r->w;
  WeightRow row;
  row.alpha = spec.alpha;
  row.rho = spec.rho;
  row.q = spec.q;
  const auto w = weight(spec);
  if (w) {
    const BoundComponents b = size_bound(spec.q, *w, spec.rho);
    row.grade.slack = b.escape_term + b.centering_adjustment;
    if (row.grade.slack <= spec.alpha / 2.0) {
      row.w = w;
      row.grade.grade = row.grade.slack > spec.alpha / 10.0 ? Grade::loose
                                                            : Grade::near_tight;
    }
  } else {
    row.grade = {Grade::infeasible, 1.0};
  }
  t.rows.push_back(row);
  write_weight_table_file(path, t);
  return row.w;
}

const std::vector<double>& default_table_alphas() {
  static const std::vector<double> v = {0.10, 0.05, 0.025, 0.01, 0.005};
  return v;
}

const std::vector<double>& default_table_rhos() {
  static const std::vector<double> v = {2, 3, 4, 5, 6, 7, 8, 9};
  return v;
}

const std::vector<int>& default_table_qs() {
  static const std::vector<int> v = {10, 15, 20, 25, 30, 35, 40, 45, 49};
  return v;
}

}  // namespace rearrange
