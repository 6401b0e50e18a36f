#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rearrange/size_bound.hpp"
#include "rearrange/weights.hpp"

using namespace rearrange;

TEST_CASE("weight matches tabulated reference cells") {
  auto w1 = weight({0.10, 2.0, 10});
  REQUIRE(w1.has_value());
  CHECK(std::abs(*w1 - 0.6333) < 5e-4);

  auto w2 = weight({0.05, 2.0, 20});
  REQUIRE(w2.has_value());
  CHECK(std::abs(*w2 - 0.5020) < 5e-4);

  auto w3 = weight({0.01, 9.0, 49});
  REQUIRE(w3.has_value());
  CHECK(std::abs(*w3 - 0.9042) < 5e-4);
}

TEST_CASE("weight absent when the bound never reaches alpha") {
  CHECK(!weight({0.05, 2.0, 10}).has_value());
}

TEST_CASE("the returned weight solves xi = alpha") {
  for (const WeightSpec spec : {WeightSpec{0.10, 2.0, 10}, WeightSpec{0.05, 2.0, 20},
                                WeightSpec{0.05, 5.0, 30}, WeightSpec{0.01, 9.0, 49},
                                WeightSpec{0.025, 3.0, 25}}) {
    auto w = weight(spec);
    REQUIRE(w.has_value());
    CHECK(std::abs(size_bound(spec.q, *w, spec.rho).total - spec.alpha) < 1e-5);
  }
}

TEST_CASE("the weight is the smallest root on the scan grid") {
  for (const WeightSpec spec :
       {WeightSpec{0.05, 2.0, 20}, WeightSpec{0.10, 4.0, 15}}) {
    auto w = weight(spec);
    REQUIRE(w.has_value());
    for (double v = 1e-3; v <= *w - 1e-3; v += 1e-3) {
      CHECK(size_bound(spec.q, v, spec.rho).total > spec.alpha);
    }
  }
}

TEST_CASE("test_weight equals weight whenever a root exists") {
  for (const WeightSpec spec :
       {WeightSpec{0.05, 2.0, 20}, WeightSpec{0.10, 2.0, 10}}) {
    auto a = weight(spec), b = test_weight(spec);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(*a == *b);
  }
}

TEST_CASE("test_weight fallback for tiny rho, absent when bound too large") {
  // At rho near zero the bound sits below alpha for every w: any weight
  // controls size, and the smallest scan weight is used.
  const WeightSpec tiny{0.05, 0.05, 20};
  CHECK(!weight(tiny).has_value());
  auto tw = test_weight(tiny);
  REQUIRE(tw.has_value());
  CHECK(*tw == doctest::Approx(1e-3));
  CHECK(size_bound(tiny.q, *tw, tiny.rho).total < tiny.alpha);

  // When the bound exceeds alpha everywhere, both are absent.
  CHECK(!weight({0.05, 2.0, 10}).has_value());
  CHECK(!test_weight({0.05, 2.0, 10}).has_value());
}

TEST_CASE("generate_table singleton agrees with weight") {
  const WeightTable t = generate_table({0.05}, {2.0}, {20});
  REQUIRE(t.rows.size() == 1);
  const WeightRow& r = t.rows[0];
  REQUIRE(r.w.has_value());
  CHECK(*r.w == *weight({0.05, 2.0, 20}));
  CHECK(r.grade.grade == Grade::near_tight);
}

TEST_CASE("generate_table canonical order and infeasible encoding") {
  // Pass the grids scrambled; rows come back sorted (alpha desc, rho asc,
  // q asc) regardless.
  const WeightTable t = generate_table({0.05, 0.10}, {3.0, 2.0}, {20, 10, 15});
  REQUIRE(t.rows.size() == 12);
  CHECK(t.rows[0].alpha == 0.10);
  CHECK(t.rows[0].rho == 2.0);
  CHECK(t.rows[0].q == 10);
  CHECK(t.rows[1].q == 15);
  CHECK(t.rows[3].rho == 3.0);
  CHECK(t.rows[6].alpha == 0.05);
  for (const auto& r : t.rows) {
    CHECK(r.w.has_value() == (r.grade.grade != Grade::infeasible));
  }
  // The known infeasible cell.
  const WeightRow* miss = t.find({0.05, 2.0, 10});
  REQUIRE(miss != nullptr);
  CHECK(!miss->w.has_value());
  CHECK(miss->grade.grade == Grade::infeasible);
}

TEST_CASE("lookup hits, misses, and infeasible entries") {
  const WeightTable t = generate_table({0.05}, {2.0}, {10, 20});
  auto hit = lookup(t, {0.05, 2.0, 20});
  REQUIRE(hit.has_value());
  CHECK(*hit == *weight({0.05, 2.0, 20}));
  CHECK(!lookup(t, {0.05, 2.0, 10}).has_value());
  // Miss falls back to computation.
  auto miss = lookup(t, {0.10, 2.0, 10});
  REQUIRE(miss.has_value());
  CHECK(std::abs(*miss - 0.6333) < 5e-4);
}

TEST_CASE("weight table CSV round trip is bit-for-bit stable") {
  const WeightTable t = generate_table({0.10, 0.05}, {2.0}, {10, 20});
  std::ostringstream first;
  write_weight_table(first, t);
  std::istringstream in(first.str());
  const WeightTable back = read_weight_table(in);
  std::ostringstream second;
  write_weight_table(second, back);
  CHECK(first.str() == second.str());
  REQUIRE(back.rows.size() == t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].alpha == t.rows[i].alpha);
    CHECK(back.rows[i].rho == t.rows[i].rho);
    CHECK(back.rows[i].q == t.rows[i].q);
    CHECK(back.rows[i].w.has_value() == t.rows[i].w.has_value());
    CHECK(static_cast<int>(back.rows[i].grade.grade) ==
          static_cast<int>(t.rows[i].grade.grade));
  }
}

TEST_CASE("file persistence is atomic-style and readable") {
  const std::string path = "weights_roundtrip_test.csv";
  const WeightTable t = generate_table({0.05}, {2.0}, {20});
  write_weight_table_file(path, t);
  const WeightTable back = read_weight_table_file(path);
  REQUIRE(back.rows.size() == 1);
  CHECK(back.rows[0].q == 20);
  std::remove(path.c_str());
  CHECK_THROWS(read_weight_table_file("no_such_file_weights.csv"));
}

TEST_CASE("cache honors REARRANGE_CACHE and avoids recomputation") {
  const std::string path = "weights_cache_test.csv";
  std::remove(path.c_str());
  setenv("REARRANGE_CACHE", path.c_str(), 1);
  CHECK(weight_cache_path() == path);

  auto w = cached_weight({0.05, 2.0, 20});
  REQUIRE(w.has_value());
  CHECK(*w == *weight({0.05, 2.0, 20}));
  // The cache file now exists and holds the entry.
  const WeightTable cached = read_weight_table_file(path);
  CHECK(cached.find({0.05, 2.0, 20}) != nullptr);

  // The cache persists 6 decimals, so the re-read agrees to that precision.
  auto again = cached_weight({0.05, 2.0, 20});
  REQUIRE(again.has_value());
  CHECK(*again == doctest::Approx(*w).epsilon(1e-6));

  std::remove(path.c_str());
  unsetenv("REARRANGE_CACHE");
}

TEST_CASE("reference grid constants") {
  CHECK(default_table_alphas() ==
        std::vector<double>{0.10, 0.05, 0.025, 0.01, 0.005});
  CHECK(default_table_rhos() ==
        std::vector<double>{2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(default_table_qs() == std::vector<int>{10, 15, 20, 25, 30, 35, 40, 45, 49});
}

TEST_CASE("weight validates alpha") {
  CHECK_THROWS(weight({0.6, 2.0, 20}));
  CHECK_THROWS(weight({0.0, 2.0, 20}));
  CHECK_THROWS(weight({0.05, 2.0, 2}));
}
