#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "estimator.hpp"

namespace structest {

// Likelihood-ratio comparison of the restricted bilinear mean model against
// the saturated cell-means model.
struct TestResult {
  double statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  double sigma2_restricted = 0.0;
  double sigma2_full = 0.0;
  std::size_t m_obs = 0;     // non-missing count M; equals n*N for complete data
  bool degenerate = false;   // all-zero group means; statistic still reported
  bool exact_fit = false;    // both residual mean squares vanish (noiseless rank-1 data)
  RestrictedFit fit;
};

struct StratumResult {
  std::string label;
  TestResult result;
  double bonferroni_p = 1.0;
};

// Per-stratum tests combined by summing the independent chi-squared
// statistics and their degrees of freedom.
struct StratifiedResult {
  std::vector<StratumResult> per_stratum;
  double combined_statistic = 0.0;
  std::size_t combined_df = 0;
  double combined_p = 1.0;
};

// (n - 1)(p - 1): the parameter-count gap np - (n + p - 1) between the
// saturated and restricted models.
std::size_t degrees_of_freedom(std::size_t n, std::size_t p);

// 2 * m_obs * (log sigma_r - log sigma_f), clamped at zero against roundoff.
// Both residual mean squares zero means the restricted model fits exactly
// (statistic 0); only the saturated one zero has no finite Gaussian
// likelihood ratio and raises errc::zero_full_variance.
double lrt_statistic(const RestrictedFit& restricted, const SaturatedFit& saturated,
                     std::size_t m_obs);

TestResult run_test(const IndicatorDataset& data, const FitOptions& options = {});

StratifiedResult run_stratified(const IndicatorDataset& data, const FitOptions& options = {});

}  // namespace structest
