#include <doctest.h>

#include <cmath>

#include "augclust/error.hpp"
#include "augclust/metrics.hpp"
#include "augclust/rng.hpp"
#include "support/oracles.hpp"

using namespace augclust;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("identical partitions score 1") {
  const std::vector<int> y = {0, 0, 1, 1};
  CHECK(nmi(y, y) == doctest::Approx(1.0));
  CHECK(rand_index(y, y) == doctest::Approx(1.0));
  // Relabeled but identical partition.
  const std::vector<int> relabeled = {7, 7, 3, 3};
  CHECK(nmi(y, relabeled) == doctest::Approx(1.0));
  CHECK(rand_index(y, relabeled) == doctest::Approx(1.0));
}

TEST_CASE("independent partitions: joint equals product of marginals") {
  const std::vector<int> y = {0, 0, 1, 1};
  const std::vector<int> c = {0, 1, 0, 1};
  CHECK(nmi(y, c) == doctest::Approx(0.0));
  CHECK(rand_index(y, c) == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("hand-computed contingency [[2,0],[1,1]]") {
  const std::vector<int> y = {0, 0, 1, 1};
  const std::vector<int> c = {0, 0, 0, 1};
  const double value = nmi(y, c);
  CHECK(value == doctest::Approx(0.343714).epsilon(1e-5));
  CHECK(value == doctest::Approx(oracles::nmi_brute_force(y, c)).epsilon(1e-12));
}

TEST_CASE("degenerate single-cluster conventions") {
  const std::vector<int> flat = {3, 3, 3, 3};
  const std::vector<int> split = {0, 1, 2, 3};
  CHECK(nmi(flat, flat) == doctest::Approx(1.0));   // both entropies 0
  CHECK(nmi(flat, split) == doctest::Approx(0.0));  // exactly one entropy 0
  CHECK(nmi(split, flat) == doctest::Approx(0.0));
  CHECK(rand_index(flat, flat) == doctest::Approx(1.0));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(nmi({0, 1}, {0}), InputError);
  CHECK_THROWS_AS(rand_index({0}, {0}), InputError);
  CHECK_THROWS_AS(nmi({}, {}), InputError);
}

TEST_CASE("normalizer conventions are exposed") {
  const std::vector<int> y = {0, 0, 1, 1};
  const std::vector<int> c = {0, 0, 0, 1};
  const double arithmetic = nmi(y, c, NmiNorm::arithmetic);
  const double geometric = nmi(y, c, NmiNorm::geometric);
  const double by_min = nmi(y, c, NmiNorm::min);
  const double by_max = nmi(y, c, NmiNorm::max);
  // H differs between the two labelings, so the conventions must order as
  // min-normalized >= geometric >= arithmetic >= max-normalized.
  CHECK(by_min >= geometric);
  CHECK(geometric >= arithmetic);
  CHECK(arithmetic >= by_max);
  CHECK(by_min > by_max);
}

TEST_CASE("symmetry and relabeling invariance on random pairs") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + rng.uniform_int(10);
    std::vector<int> y(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = rng.uniform_int(3);
      c[static_cast<std::size_t>(i)] = rng.uniform_int(3);
    }
    CHECK(nmi(y, c) == doctest::Approx(nmi(c, y)).epsilon(1e-12));
    CHECK(rand_index(y, c) == doctest::Approx(rand_index(c, y)).epsilon(1e-12));

    // Permute label ids (0,1,2) -> (2,0,1) in one argument.
    std::vector<int> permuted = c;
    for (int& v : permuted) v = (v + 2) % 3;
    CHECK(nmi(y, permuted) == doctest::Approx(nmi(y, c)).epsilon(1e-12));
    CHECK(rand_index(y, permuted) == doctest::Approx(rand_index(y, c)).epsilon(1e-12));
  }
}

TEST_CASE("combinatorial rand index equals pair enumeration on random pairs") {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + rng.uniform_int(11);
    std::vector<int> y(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = rng.uniform_int(4);
      c[static_cast<std::size_t>(i)] = rng.uniform_int(4);
    }
    CHECK(rand_index(y, c) == doctest::Approx(oracles::rand_index_brute_force(y, c)).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive oracle over all labelings of up to 6 points") {
  // Every pair of labelings of n points with up to 3 labels, n in 2..5 here
  // (the acceptance suite runs the full n=6 sweep).
  for (int n = 2; n <= 5; ++n) {
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    std::vector<int> y(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
    for (std::int64_t a = 0; a < total; ++a) {
      std::int64_t rest_a = a;
      for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = static_cast<int>(rest_a % 3);
        rest_a /= 3;
      }
      for (std::int64_t b = 0; b < total; ++b) {
        std::int64_t rest_b = b;
        for (int i = 0; i < n; ++i) {
          c[static_cast<std::size_t>(i)] = static_cast<int>(rest_b % 3);
          rest_b /= 3;
        }
        REQUIRE(std::fabs(nmi(y, c) - oracles::nmi_brute_force(y, c)) < 1e-9);
        REQUIRE(std::fabs(rand_index(y, c) - oracles::rand_index_brute_force(y, c)) < 1e-9);
      }
    }
  }
}

TEST_SUITE_END();
