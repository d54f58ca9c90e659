// Independent verifiers, pinned before the production estimator: closed-form
// chi-squared tails and the spectral rank-1 solution.

#include <doctest.h>

#include <cmath>
#include <random>

#include "chi_squared.hpp"
#include "errors.hpp"
#include "oracle.hpp"
#include "testutil.hpp"

using namespace structest;
using test::make_cell_means;

namespace {

// Smallest eigenvalue of M^T M for M = [[2,1],[1,1]]: the characteristic
// polynomial is t^2 - 7t + 1.
const double kSmallestSingularSq = (7.0 - std::sqrt(45.0)) / 2.0;

}  // namespace

TEST_CASE("chi_sq_sf_even closed forms") {
  for (double x : {0.0, 0.5, 1.0, 2.0, 5.99146, 10.0, 50.0, 120.0})
    CHECK(chi_sq_sf_even(x, 2) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-14));
  for (std::size_t df : {2u, 4u, 6u, 8u, 20u}) CHECK(chi_sq_sf_even(0.0, df) == 1.0);

  // df 4: exp(-x/2) (1 + x/2)
  const double x = 67.23;
  const double closed = std::exp(-x / 2.0) * (1.0 + x / 2.0);
  CHECK(chi_sq_sf_even(x, 4) == doctest::Approx(closed).epsilon(1e-14));
  CHECK(std::fabs(chi_sq_sf_even(x, 4) - 8.7e-14) / 8.7e-14 < 0.02);

  CHECK_THROWS_AS((void)chi_sq_sf_even(1.0, 3), Error);
  CHECK_THROWS_AS((void)chi_sq_sf_even(1.0, 22), Error);
}

TEST_CASE("chi_sq_sf agrees with the even-df closed forms") {
  for (std::size_t df : {2u, 4u, 6u, 8u}) {
    for (double x = 0.0; x <= 200.0; x += 0.5) {
      const double expected = chi_sq_sf_even(x, df);
      CHECK(std::fabs(chi_sq_sf(x, df) - expected) < 1e-10);
    }
  }
}

TEST_CASE("chi_sq_sf anchors and shape") {
  CHECK(std::fabs(chi_sq_sf(67.23, 4) - 8.7e-14) / 8.7e-14 < 0.02);
  CHECK(std::fabs(chi_sq_sf(5.99146, 2) - 0.05) < 1e-5);
  for (std::size_t df : {1u, 2u, 5u, 50u, 200u}) CHECK(chi_sq_sf(0.0, df) == 1.0);

  // strictly decreasing in x, mapped into [0, 1]
  for (std::size_t df : {1u, 4u, 17u, 200u}) {
    double prev = 1.0;
    for (double x = 0.25; x <= 400.0; x += 0.25) {
      const double q = chi_sq_sf(x, df);
      CHECK(q >= 0.0);
      CHECK(q < prev);
      prev = q;
    }
  }

  // df 1 has its own closed form: Q(x) = erfc(sqrt(x/2))
  for (double x : {0.5, 1.0, 3.841458820694124, 10.0})
    CHECK(chi_sq_sf(x, 1) == doctest::Approx(std::erfc(std::sqrt(x / 2.0))).epsilon(1e-12));
}

TEST_CASE("weighted_rank1 reproduces the 2x2 hand anchor") {
  for (std::size_t m : {1u, 3u, 10u}) {
    const auto cm = make_cell_means(2, 2, {2.0, 1.0, 1.0, 1.0},
                                    {m, m, m, m});
    const auto fit = weighted_rank1(cm);
    CHECK(fit.lack_of_fit ==
          doctest::Approx(static_cast<double>(m) * kSmallestSingularSq).epsilon(1e-12));
  }
}

TEST_CASE("weighted_rank1 on rank-1 input is exact") {
  const std::vector<double> a{1.0, -2.0, 0.5};
  const std::vector<double> b{3.0, 1.0};
  std::vector<double> means(6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t z = 0; z < 2; ++z) means[i * 2 + z] = a[i] * b[z];
  const auto cm = make_cell_means(3, 2, means, {4, 7, 4, 7, 4, 7});
  const auto fit = weighted_rank1(cm);
  CHECK(fit.lack_of_fit == doctest::Approx(0.0).epsilon(0).scale(1e-12));
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(fit.fitted_products[i] == doctest::Approx(means[i]).epsilon(1e-10));
}

TEST_CASE("weighted_rank1 with tied singular values still attains the optimum") {
  // identity means: both singular values 1; any optimal rank-1 leaves m.
  for (std::size_t m : {1u, 5u}) {
    const auto cm = make_cell_means(2, 2, {1.0, 0.0, 0.0, 1.0}, {m, m, m, m});
    const auto fit = weighted_rank1(cm);
    CHECK(fit.lack_of_fit == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
  }
}

TEST_CASE("weighted_rank1 never loses to a random rank-1 candidate") {
  std::mt19937_64 rng(20240817);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(2, 5);
  std::uniform_int_distribution<std::size_t> count(1, 9);

  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t n = dim(rng), p = dim(rng);
    std::vector<double> means(n * p);
    std::vector<std::size_t> counts(n * p);
    const bool uniform_counts = instance % 2 == 0;
    for (std::size_t z = 0; z < p; ++z) {
      const std::size_t shared = count(rng);
      for (std::size_t i = 0; i < n; ++i) {
        means[i * p + z] = gauss(rng);
        counts[i * p + z] = uniform_counts ? shared : count(rng);
      }
    }
    const auto cm = make_cell_means(n, p, means, counts);
    const auto fit = weighted_rank1(cm);

    std::vector<double> a(n), b(p);
    for (int candidate = 0; candidate < 100; ++candidate) {
      for (auto& x : a) x = gauss(rng);
      for (auto& x : b) x = gauss(rng);
      CHECK(fit.lack_of_fit <= weighted_candidate_sse(cm, a, b) + 1e-9);
    }
  }
}

TEST_CASE("weighted_rank1 output has rank one") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int instance = 0; instance < 10; ++instance) {
    const std::size_t n = 4, p = 3;
    std::vector<double> means(n * p);
    for (auto& m : means) m = gauss(rng);
    const auto cm = make_cell_means(n, p, means, std::vector<std::size_t>(n * p, 5));
    const auto fit = weighted_rank1(cm);
    double scale = 0.0;
    for (double v : fit.fitted_products) scale = std::max(scale, std::fabs(v));
    for (std::size_t i1 = 0; i1 < n; ++i1)
      for (std::size_t i2 = i1 + 1; i2 < n; ++i2)
        for (std::size_t z1 = 0; z1 < p; ++z1)
          for (std::size_t z2 = z1 + 1; z2 < p; ++z2) {
            const double minor = fit.product(i1, z1) * fit.product(i2, z2) -
                                 fit.product(i1, z2) * fit.product(i2, z1);
            CHECK(std::fabs(minor) <= 1e-10 * std::max(1.0, scale * scale));
          }
  }
}

TEST_CASE("weighted_rank1 rejects empty cells") {
  auto cm = make_cell_means(2, 2, {1.0, 2.0, 3.0, 4.0}, {1, 1, 0, 1});
  CHECK_THROWS_AS((void)weighted_rank1(cm), Error);
}
