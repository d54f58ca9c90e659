#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "estimator.hpp"
#include "oracle.hpp"
#include "simulate.hpp"
#include "testutil.hpp"

using namespace structest;

namespace {

const double kGap2x2 = (7.0 - std::sqrt(45.0)) / 2.0;  // t^2 - 7t + 1 root

// Two indicators, two groups, m subjects per group, constant within cells:
// cell means [[2,1],[1,1]].
IndicatorDataset anchor_2x2(std::size_t m) {
  std::vector<double> values;
  std::vector<std::string> groups;
  for (std::size_t k = 0; k < m; ++k) {
    values.insert(values.end(), {2.0, 1.0});
    groups.push_back("g1");
  }
  for (std::size_t k = 0; k < m; ++k) {
    values.insert(values.end(), {1.0, 1.0});
    groups.push_back("g2");
  }
  return IndicatorDataset::from_labels(std::move(values), 2 * m, 2, groups);
}

std::vector<double> fitted_products(const RestrictedFit& fit, std::size_t p) {
  std::vector<double> out(fit.alpha.size() * p);
  for (std::size_t i = 0; i < fit.alpha.size(); ++i)
    for (std::size_t z = 0; z < p; ++z) out[i * p + z] = fit.alpha[i] * fit.beta[z];
  return out;
}

}  // namespace

TEST_CASE("init_alpha copies reference-group means") {
  const auto ds = IndicatorDataset::from_labels({1.0, 2.0,
                                                 3.0, 2.0,
                                                 9.0, 9.0},
                                                3, 2, {"z*", "z*", "other"});
  const auto a = init_alpha(ds, "z*");
  REQUIRE(a.size() == 2);
  CHECK(a[0] == 2.0);
  CHECK(a[1] == 2.0);

  const auto ds2 = IndicatorDataset::from_labels({0.4, -0.1, 0.7}, 1, 3, {"only"});
  const auto a2 = init_alpha(ds2, "only");
  CHECK(a2 == std::vector<double>{0.4, -0.1, 0.7});
}

TEST_CASE("init_alpha rejects a degenerate reference group") {
  const auto ds = IndicatorDataset::from_labels({0.0, 0.0, 1.0, 2.0},
                                                2, 2, {"zeros", "live"});
  CHECK_THROWS_AS((void)init_alpha(ds, "zeros"), Error);
  CHECK_NOTHROW((void)init_alpha(ds, "live"));
  CHECK_THROWS_AS((void)init_alpha(ds, "missing-label"), Error);
}

TEST_CASE("update_beta reductions") {
  // alpha all ones: beta_z is the grand mean of all values in group z
  const auto ds = IndicatorDataset::from_labels({1.0, 2.0,
                                                 3.0, 6.0,
                                                 10.0, 20.0},
                                                3, 2, {"a", "a", "b"});
  const auto beta = update_beta({1.0, 1.0}, ds);
  CHECK(beta[0] == doctest::Approx(3.0).epsilon(1e-15));   // (1+2+3+6)/4
  CHECK(beta[1] == doctest::Approx(15.0).epsilon(1e-15));  // (10+20)/2

  // n = 1: beta_z = group mean / a
  const auto one = IndicatorDataset::from_labels({4.0, 8.0}, 2, 1, {"a", "b"});
  const auto beta1 = update_beta({2.0}, one);
  CHECK(beta1[0] == 2.0);
  CHECK(beta1[1] == 4.0);
}

TEST_CASE("update_beta hand-evaluated weighted sum") {
  // alpha = (1,2), group cell means (3,6) with equal counts:
  // beta = (1*3 + 2*6)/(1 + 4) = 3
  const auto ds = IndicatorDataset::from_labels({3.0, 6.0,
                                                 3.0, 6.0},
                                                2, 2, {"z", "z"});
  const auto beta = update_beta({1.0, 2.0}, ds);
  CHECK(beta[0] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("update_alpha reductions") {
  // beta all ones: alpha_i is the overall mean of X_i
  const auto ds = IndicatorDataset::from_labels({1.0, 4.0,
                                                 3.0, 8.0},
                                                2, 2, {"a", "b"});
  const auto alpha = update_alpha({1.0, 1.0}, ds);
  CHECK(alpha[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(alpha[1] == doctest::Approx(6.0).epsilon(1e-15));

  // p = 1: alpha_i = overall mean / b
  const auto one = IndicatorDataset::from_labels({4.0, 8.0}, 2, 1, {"only", "only"});
  const auto alpha1 = update_alpha({2.0}, one);
  CHECK(alpha1[0] == 3.0);
}

TEST_CASE("update_alpha hand-evaluated weighted sum") {
  // beta = (1,2), subject groups (1,2), X values (3,6):
  // alpha = (1*3 + 2*6)/(1 + 4) = 3
  const auto ds = IndicatorDataset::from_labels({3.0, 6.0}, 2, 1, {"g1", "g2"});
  const auto alpha = update_alpha({1.0, 2.0}, ds);
  CHECK(alpha[0] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("updates reject zero denominators") {
  const auto ds = IndicatorDataset::from_labels({1.0, 2.0}, 2, 1, {"a", "a"});
  CHECK_THROWS_AS((void)update_beta({0.0}, ds), Error);
  CHECK_THROWS_AS((void)update_alpha({0.0}, ds), Error);
}

TEST_CASE("rank-1 cell means give restricted = saturated") {
  // means [[1,2],[2,4]] with zero within-cell noise
  std::vector<double> values;
  std::vector<std::string> groups;
  for (int r = 0; r < 3; ++r) {
    values.insert(values.end(), {1.0, 2.0});
    groups.push_back("g1");
    values.insert(values.end(), {2.0, 4.0});
    groups.push_back("g2");
  }
  const auto ds = IndicatorDataset::from_labels(std::move(values), 6, 2, groups);
  const auto fit = fit_restricted(ds);
  const auto sat = fit_saturated(ds);
  CHECK(fit.converged);
  CHECK(fit.sigma2_restricted == doctest::Approx(sat.sigma2_full).epsilon(0).scale(1e-14));
  CHECK(fit.alpha[0] * fit.beta[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.alpha[1] * fit.beta[1] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("2x2 anchor: variance gap equals the smallest singular value") {
  for (std::size_t m : {2u, 5u}) {
    const auto ds = anchor_2x2(m);
    const auto fit = fit_restricted(ds);
    const auto sat = fit_saturated(ds);
    CHECK(sat.sigma2_full == 0.0);
    CHECK(fit.sigma2_restricted - sat.sigma2_full ==
          doctest::Approx(kGap2x2 / 4.0).epsilon(1e-9));
  }
}

TEST_CASE("null data converges in very few iterations") {
  ScenarioSpec spec;
  spec.scenario = Scenario::kStructural;
  spec.n = 5;
  spec.num_subjects = 2000;
  spec.lambda = {0.9, 0.8, 0.7, 0.6, 0.5};
  spec.noise_sd.assign(5, 1.0);
  spec.eta_mean = 0.0;
  spec.eta_sd = 1.0;
  spec.group_probs = {0.5, 0.5};
  spec.eta_shift = {0.0, 0.3};
  spec.direct_shift.assign(10, 0.0);
  const auto ds = generate(spec, 42);
  const auto fit = fit_restricted(ds);
  CHECK(fit.converged);
  CHECK(fit.iterations <= 10);
}

TEST_CASE("saturated fit residuals") {
  // group z holds X1 values {0, 2}: SSE contribution 2
  const auto ds = IndicatorDataset::from_labels({0.0, 2.0, 5.0}, 3, 1,
                                                {"z", "z", "w"});
  const auto sat = fit_saturated(ds);
  CHECK(sat.sigma2_full == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  // zero within-cell variance
  const auto flat = IndicatorDataset::from_labels({1.0, 1.0, 4.0, 4.0}, 4, 1,
                                                  {"a", "a", "b", "b"});
  CHECK(fit_saturated(flat).sigma2_full == 0.0);

  // one group: pooled variance about indicator means with divisor M
  const auto pooled = IndicatorDataset::from_labels({1.0, 3.0, 5.0}, 3, 1,
                                                    {"g", "g", "g"});
  CHECK(fit_saturated(pooled).sigma2_full == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("mse trace is non-increasing") {
  std::mt19937_64 rng(314159);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 2 + rng() % 4;
    const std::size_t p = 2 + rng() % 3;
    const auto ds = test::random_dataset(rng, n, p, 30 + rng() % 80,
                                         rep % 3 == 0 ? 0.1 : 0.0);
    const auto fit = fit_restricted(ds);
    for (std::size_t t = 1; t < fit.mse_trace.size(); ++t)
      CHECK(fit.mse_trace[t] <= fit.mse_trace[t - 1] + 1e-12 * std::max(1.0, fit.mse_trace[t - 1]));
    const auto sat = fit_saturated(ds);
    CHECK(fit.sigma2_restricted >= sat.sigma2_full - 1e-12);
  }
}

TEST_CASE("initialization rescaling leaves fitted products unchanged") {
  std::mt19937_64 rng(99);
  const auto ds = test::random_dataset(rng, 4, 3, 80);
  const auto base = init_alpha(ds, ds.group_names()[0]);

  FitOptions opts;
  opts.init_alpha = base;
  const auto fit1 = fit_restricted(ds, opts);

  for (double tau : {7.3, -2.5, 1e4}) {
    auto scaled = base;
    for (auto& a : scaled) a /= tau;
    FitOptions opts2;
    opts2.init_alpha = scaled;
    const auto fit2 = fit_restricted(ds, opts2);
    const auto p1 = fitted_products(fit1, ds.num_groups());
    const auto p2 = fitted_products(fit2, ds.num_groups());
    for (std::size_t idx = 0; idx < p1.size(); ++idx)
      CHECK(p2[idx] == doctest::Approx(p1[idx]).epsilon(1e-6));
  }
}

TEST_CASE("reported parameters are normalized") {
  std::mt19937_64 rng(1234);
  const auto ds = test::random_dataset(rng, 5, 2, 60);
  const auto fit = fit_restricted(ds);
  double norm2 = 0.0;
  for (double a : fit.alpha) norm2 += a * a;
  CHECK(std::sqrt(norm2) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  std::size_t lead = 0;
  for (std::size_t i = 1; i < fit.alpha.size(); ++i)
    if (std::fabs(fit.alpha[i]) > std::fabs(fit.alpha[lead])) lead = i;
  CHECK(fit.alpha[lead] > 0.0);
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(77);
  const std::size_t n = 3, p = 3, N = 50;
  const auto ds = test::random_dataset(rng, n, p, N);

  // permute indicators: (0,1,2) -> (2,0,1)
  std::vector<double> values(N * n);
  std::vector<std::string> groups(N);
  const std::size_t perm[3] = {2, 0, 1};
  for (std::size_t k = 0; k < N; ++k) {
    groups[k] = ds.group_names()[static_cast<std::size_t>(ds.group_of(k))];
    for (std::size_t i = 0; i < n; ++i) values[k * n + i] = ds.value(k, perm[i]);
  }
  const auto permuted = IndicatorDataset::from_labels(std::move(values), N, n, groups);

  const auto fit = fit_restricted(ds);
  const auto fit2 = fit_restricted(permuted);
  CHECK(fit2.sigma2_restricted == doctest::Approx(fit.sigma2_restricted).epsilon(1e-10));
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::fabs(fit2.alpha[i]) == doctest::Approx(std::fabs(fit.alpha[perm[i]])).epsilon(1e-6));
  CHECK(fit_saturated(permuted).sigma2_full ==
        doctest::Approx(fit_saturated(ds).sigma2_full).epsilon(1e-12));
}

TEST_CASE("alternating fit matches the spectral oracle on complete data") {
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<std::size_t> dim(2, 5);
  std::uniform_int_distribution<std::size_t> size(20, 200);
  FitOptions tight;
  tight.tol = 1e-13;
  tight.max_iter = 5000;

  for (int instance = 0; instance < 50; ++instance) {
    const auto ds = test::random_dataset(rng, dim(rng), dim(rng), size(rng));
    const auto fit = fit_restricted(ds, tight);
    const auto check = oracle_check(ds, fit);
    CHECK(check.abs_diff < 1e-8);
  }
}

TEST_CASE("all-zero data yields the degenerate zero fit") {
  const auto ds = IndicatorDataset::from_labels({0.0, 0.0, 0.0, 0.0},
                                                2, 2, {"a", "b"});
  const auto fit = fit_restricted(ds);
  CHECK(fit.degenerate);
  CHECK(fit.converged);
  CHECK(fit.alpha == std::vector<double>{0.0, 0.0});
  CHECK(fit.beta == std::vector<double>{0.0, 0.0});
  CHECK(fit.sigma2_restricted == 0.0);
}

TEST_CASE("a degenerate requested reference group falls back to the automatic rule") {
  const auto ds = IndicatorDataset::from_labels({0.0, 0.0,
                                                 0.0, 0.0,
                                                 1.0, 2.0},
                                                3, 2, {"zeros", "zeros", "live"});
  FitOptions opts;
  opts.ref_group = "zeros";
  const auto fit = fit_restricted(ds, opts);
  CHECK(!fit.degenerate);
}

TEST_CASE("iteration cap returns the partial fit unconverged") {
  std::mt19937_64 rng(8);
  const auto ds = test::random_dataset(rng, 4, 3, 60);
  FitOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-300;
  const auto fit = fit_restricted(ds, opts);
  CHECK(!fit.converged);
  CHECK(fit.iterations == 1);
  CHECK(fit.mse_trace.size() == 1);
  CHECK(fit.sigma2_restricted > 0.0);
}
