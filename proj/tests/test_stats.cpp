#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "biaslens/stats.hpp"
#include "oracles.hpp"

using namespace biaslens;
using Catch::Approx;

// ---------------------------------------------------------------------------
// log_minmax_normalize
// ---------------------------------------------------------------------------

TEST_CASE("normalize maps equal log spacing to midpoint") {
  const std::map<std::string, double> counts = {{"a", 10}, {"b", 100}, {"c", 1000}};
  const auto s = log_minmax_normalize(counts, ZeroPolicy::Drop);
  CHECK(s.values.at("a") == Approx(0.0).margin(1e-12));
  CHECK(s.values.at("b") == Approx(0.5).margin(1e-12));
  CHECK(s.values.at("c") == Approx(1.0).margin(1e-12));
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("normalize degenerates to 0.5 when max equals min") {
  const std::map<std::string, double> counts = {{"a", 7}, {"b", 7}};
  const auto s = log_minmax_normalize(counts, ZeroPolicy::Drop);
  CHECK(s.degenerate);
  CHECK(s.values.at("a") == 0.5);
  CHECK(s.values.at("b") == 0.5);
}

TEST_CASE("normalize zero policies") {
  const std::map<std::string, double> counts = {{"a", 0}, {"b", 10}};

  SECTION("drop removes the zero article, leaving a degenerate series") {
    const auto s = log_minmax_normalize(counts, ZeroPolicy::Drop);
    CHECK(s.values.size() == 1);
    CHECK(s.values.at("b") == 0.5);
    CHECK(s.degenerate);
  }
  SECTION("add_one keeps it; values match an independent recomputation") {
    const auto s = log_minmax_normalize(counts, ZeroPolicy::AddOne);
    const auto want = oracle::normalize_def(counts, /*add_one=*/true);
    REQUIRE(s.values.size() == 2);
    CHECK(oracle::close_rel(s.values.at("a"), want.at("a"), 1e-12));
    CHECK(oracle::close_rel(s.values.at("b"), want.at("b"), 1e-12));
    CHECK(s.values.at("a") == Approx(0.0).margin(1e-12));
    CHECK(s.values.at("b") == Approx(1.0).margin(1e-12));
  }
  SECTION("drop on all-zero input reports EmptyInput") {
    const std::map<std::string, double> zeros = {{"a", 0}, {"b", 0}};
    CHECK_THROWS_AS(log_minmax_normalize(zeros, ZeroPolicy::Drop), EmptyInputError);
  }
}

TEST_CASE("normalize is invariant to uniform scaling and log base") {
  oracle::VectorGen gen(2024);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = gen.size_between(2, 30);
    std::map<std::string, double> counts;
    for (std::size_t i = 0; i < n; ++i)
      counts["a" + std::to_string(i)] = 1.0 + 5000.0 * gen.next01();

    const auto base_series = log_minmax_normalize(counts, ZeroPolicy::Drop);
    for (double c : {0.5, 3.0, 1000.0}) {
      std::map<std::string, double> scaled;
      for (const auto& [id, v] : counts) scaled[id] = c * v;
      const auto s = log_minmax_normalize(scaled, ZeroPolicy::Drop);
      for (const auto& [id, v] : base_series.values)
        CHECK(s.values.at(id) == Approx(v).margin(1e-12));
    }
    for (double base : {2.0, 10.0}) {
      const auto s = log_minmax_normalize(counts, ZeroPolicy::Drop, base);
      for (const auto& [id, v] : base_series.values)
        CHECK(s.values.at(id) == Approx(v).margin(1e-12));
    }
  }
}

// ---------------------------------------------------------------------------
// pearson
// ---------------------------------------------------------------------------

TEST_CASE("pearson exact cases") {
  const std::vector<double> a = {1, 2, 3};
  CHECK(pearson(a, a) == Approx(1.0));
  const std::vector<double> rev = {3, 2, 1};
  CHECK(pearson(a, rev) == Approx(-1.0));
  // hand-computed: covariance 1.0 over variances 1.25 each
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {1, 3, 2, 4};
  CHECK(pearson(x, y) == Approx(0.8));
}

TEST_CASE("pearson error paths") {
  const std::vector<double> x = {1, 2, 3};
  const std::vector<double> flat = {5, 5, 5};
  const std::vector<double> shorter = {1, 2};
  CHECK_THROWS_AS(pearson(x, shorter), LengthMismatchError);
  try {
    pearson(flat, x);
    FAIL("expected ZeroVarianceError");
  } catch (const ZeroVarianceError& e) {
    CHECK(e.which == "x");
  }
  try {
    pearson(x, flat);
    FAIL("expected ZeroVarianceError");
  } catch (const ZeroVarianceError& e) {
    CHECK(e.which == "y");
  }
}

TEST_CASE("pearson symmetry and affine equivariance") {
  oracle::VectorGen gen(77);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = gen.size_between(3, 40);
    const auto x = gen.uniform(n, -5, 5);
    const auto y = gen.uniform(n, -5, 5);
    const double r = pearson(x, y);
    CHECK(pearson(y, x) == Approx(r).margin(1e-12));

    const double a = gen.next01() > 0.5 ? 2.5 : -2.5;
    const double b = 10.0 * gen.next01();
    std::vector<double> ax(n);
    for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i] + b;
    const double sign = a > 0 ? 1.0 : -1.0;
    CHECK(pearson(ax, y) == Approx(sign * r).margin(1e-9));
  }
}

// ---------------------------------------------------------------------------
// spearman
// ---------------------------------------------------------------------------

TEST_CASE("spearman exact cases") {
  const std::vector<double> x = {1, 2, 3};
  const std::vector<double> mono = {10, 200, 3000};
  CHECK(spearman(x, mono) == Approx(1.0));
  const std::vector<double> rev = {9, 5, 1};
  CHECK(spearman(x, rev) == Approx(-1.0));
}

TEST_CASE("spearman with ties matches the rank-then-pearson oracle") {
  const std::vector<double> x = {1, 2, 2, 3};
  const std::vector<double> y = {1, 2, 3, 4};
  const long double want = oracle::spearman_def(x, y);
  CHECK(oracle::close_rel(spearman(x, y), want, 1e-12));
}

TEST_CASE("spearman rejects all-tied input") {
  const std::vector<double> flat = {4, 4, 4};
  const std::vector<double> y = {1, 2, 3};
  CHECK_THROWS_AS(spearman(flat, y), ZeroVarianceError);
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  oracle::VectorGen gen(4096);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = gen.size_between(3, 30);
    const auto x = gen.with_ties(n, 6);
    const auto y = gen.uniform(n, 0, 100);
    double rho;
    try {
      rho = spearman(x, y);
    } catch (const ZeroVarianceError&) {
      continue;  // all-tied draw
    }
    std::vector<double> tx(n);
    for (std::size_t i = 0; i < n; ++i) tx[i] = std::exp(x[i] / 2.0);
    CHECK(spearman(tx, y) == Approx(rho).margin(1e-12));
  }
}

// ---------------------------------------------------------------------------
// ols_fit
// ---------------------------------------------------------------------------

TEST_CASE("ols exact line") {
  const std::vector<double> x = {0, 1, 2};
  const std::vector<double> y = {1, 3, 5};
  const auto fit = ols_fit(x, y);
  CHECK(fit.slope == Approx(2.0));
  CHECK(fit.intercept == Approx(1.0));
  CHECK(fit.r_squared == Approx(1.0));
  CHECK_FALSE(fit.constant_response);
}

TEST_CASE("ols flat covariance") {
  // hand-computed: Sxy = 0, mean(y) = 1/3
  const std::vector<double> x = {0, 1, 2};
  const std::vector<double> y = {0, 1, 0};
  const auto fit = ols_fit(x, y);
  CHECK(fit.slope == Approx(0.0).margin(1e-15));
  CHECK(fit.intercept == Approx(1.0 / 3.0));
  CHECK(fit.r_squared == Approx(0.0).margin(1e-15));
}

TEST_CASE("ols constant response convention") {
  const std::vector<double> x = {0, 1, 2};
  const std::vector<double> y = {5, 5, 5};
  const auto fit = ols_fit(x, y);
  CHECK(fit.slope == Approx(0.0).margin(1e-15));
  CHECK(fit.intercept == Approx(5.0));
  CHECK(fit.r_squared == 0.0);
  CHECK(fit.constant_response);
}

TEST_CASE("ols degenerate predictor") {
  const std::vector<double> x = {2, 2, 2};
  const std::vector<double> y = {1, 2, 3};
  try {
    ols_fit(x, y);
    FAIL("expected ZeroVarianceError");
  } catch (const ZeroVarianceError& e) {
    CHECK(e.which == "x");
  }
}

TEST_CASE("ols residual identities and orientation swap") {
  oracle::VectorGen gen(555);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = gen.size_between(3, 50);
    const auto x = gen.uniform(n, -10, 10);
    auto y = gen.uniform(n, -10, 10);
    // mix in correlation so r^2 spans the range
    for (std::size_t i = 0; i < n; ++i) y[i] += 0.7 * x[i];

    const auto fit = ols_fit(x, y);
    double sum_e = 0.0, sum_ex = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - (fit.slope * x[i] + fit.intercept);
      sum_e += e;
      sum_ex += e * x[i];
    }
    CHECK(std::fabs(sum_e) < 1e-9);
    CHECK(std::fabs(sum_ex) < 1e-9);

    const double r = pearson(x, y);
    CHECK(fit.r_squared == Approx(r * r).margin(1e-9));
    const auto swapped = ols_fit(y, x);
    CHECK(fit.slope * swapped.slope == Approx(fit.r_squared).margin(1e-9));
  }
}

// ---------------------------------------------------------------------------
// mean_and_std
// ---------------------------------------------------------------------------

TEST_CASE("mean_and_std exact cases") {
  const std::vector<double> constant = {5, 5, 5};
  const auto s1 = mean_and_std(constant, StdMode::Population);
  CHECK(s1.mean == Approx(5.0));
  CHECK(s1.std_dev == 0.0);

  // hand computation: variance (9*4 + 324)/10 = 36
  const std::vector<double> skewed = {1, 1, 1, 1, 1, 1, 1, 1, 1, 21};
  const auto s2 = mean_and_std(skewed, StdMode::Population);
  CHECK(s2.mean == Approx(3.0));
  CHECK(s2.std_dev == Approx(6.0));

  // hand computation with n-1 divisor
  const std::vector<double> two = {0, 2};
  const auto s3 = mean_and_std(two, StdMode::Sample);
  CHECK(s3.mean == Approx(1.0));
  CHECK(s3.std_dev == Approx(std::sqrt(2.0)));
}

TEST_CASE("mean_and_std error paths") {
  const std::vector<double> one = {1};
  CHECK_THROWS_AS(mean_and_std(one, StdMode::Sample), InsufficientDataError);
  CHECK(mean_and_std(one, StdMode::Population).std_dev == 0.0);
  const std::vector<double> empty;
  CHECK_THROWS_AS(mean_and_std(empty, StdMode::Population), InsufficientDataError);
}

TEST_CASE("std is zero iff all inputs equal") {
  oracle::VectorGen gen(31337);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = gen.size_between(2, 20);
    auto v = gen.with_ties(n, 3);
    const auto s = mean_and_std(v, StdMode::Population);
    bool all_equal = true;
    for (double x : v) all_equal = all_equal && x == v[0];
    CHECK((s.std_dev == 0.0) == all_equal);
  }
}

// ---------------------------------------------------------------------------
// band position
// ---------------------------------------------------------------------------

TEST_CASE("band membership is closed at the edges") {
  SummaryStats stats;
  stats.mean = 3.0;
  stats.std_dev = 6.0;
  stats.n = 10;
  CHECK(band_position(15.0, stats, 2.0) == BandPosition::Inside);  // exactly mean+2s
  CHECK(band_position(-9.0, stats, 2.0) == BandPosition::Inside);  // exactly mean-2s
  CHECK(band_position(15.0000001, stats, 2.0) == BandPosition::Above);
  CHECK(band_position(-9.0000001, stats, 2.0) == BandPosition::Below);
  CHECK(band_position(3.0, stats, 2.0) == BandPosition::Inside);
}
