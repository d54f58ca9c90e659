#include "lrt.hpp"

#include <algorithm>
#include <cmath>

#include "chi_squared.hpp"
#include "errors.hpp"

namespace structest {

namespace {

// A residual mean square this far below the data's raw mean square is
// indistinguishable from accumulated roundoff and treated as exactly zero,
// so noiseless rank-1 data reports an exact fit instead of a spurious
// variance ratio.
constexpr double kVarianceFloorRel = 1e-24;

double raw_mean_square(const IndicatorDataset& data) {
  double ss = 0.0;
  for (std::size_t k = 0; k < data.num_subjects(); ++k)
    for (std::size_t i = 0; i < data.num_indicators(); ++i)
      if (!data.missing(k, i)) {
        const double v = data.value(k, i);
        ss += v * v;
      }
  return ss / static_cast<double>(data.observed_count());
}

}  // namespace

std::size_t degrees_of_freedom(std::size_t n, std::size_t p) {
  if (n < 1 || p < 1) throw_error(errc::invalid_argument, "need n >= 1 and p >= 1");
  return (n - 1) * (p - 1);
}

double lrt_statistic(const RestrictedFit& restricted, const SaturatedFit& saturated,
                     std::size_t m_obs) {
  const double s2r = restricted.sigma2_restricted;
  const double s2f = saturated.sigma2_full;
  if (s2f <= 0.0) {
    if (s2r <= 0.0) return 0.0;
    throw_error(errc::zero_full_variance,
                "saturated residual variance is zero but the restricted one is not; "
                "the Gaussian likelihood ratio is unbounded");
  }
  return std::max(0.0, static_cast<double>(m_obs) * std::log(s2r / s2f));
}

TestResult run_test(const IndicatorDataset& data, const FitOptions& options) {
  if (data.num_groups() < 2)
    throw_error(errc::insufficient_groups, "testing needs at least two groups");
  if (data.num_indicators() < 2)
    throw_error(errc::invalid_argument, "testing needs at least two indicators");

  SaturatedFit saturated = fit_saturated(data);
  RestrictedFit restricted = fit_restricted(data, options);

  // Floor both residual mean squares relative to the data scale before
  // forming the ratio; see kVarianceFloorRel.
  const double floor = kVarianceFloorRel * raw_mean_square(data);
  if (restricted.sigma2_restricted <= floor) restricted.sigma2_restricted = 0.0;
  if (saturated.sigma2_full <= floor) saturated.sigma2_full = 0.0;

  TestResult out;
  out.m_obs = data.observed_count();
  out.df = degrees_of_freedom(data.num_indicators(), data.num_groups());
  out.statistic = lrt_statistic(restricted, saturated, out.m_obs);
  out.p_value = chi_sq_sf(out.statistic, out.df);
  out.sigma2_restricted = restricted.sigma2_restricted;
  out.sigma2_full = saturated.sigma2_full;
  out.exact_fit = saturated.sigma2_full <= 0.0;
  out.degenerate = restricted.degenerate;
  out.fit = std::move(restricted);
  return out;
}

StratifiedResult run_stratified(const IndicatorDataset& data, const FitOptions& options) {
  if (!data.has_strata())
    throw_error(errc::invalid_argument, "dataset has no strata");

  StratifiedResult out;
  const std::size_t s = data.num_strata();
  for (std::size_t c = 0; c < s; ++c) {
    const std::string& label = data.stratum_names()[c];
    TestResult result;
    try {
      result = run_test(data.stratum_subset(static_cast<int>(c)), options);
    } catch (const Error& e) {
      if (e.code() == errc::empty_cell || e.code() == errc::stratum_too_small)
        throw_error(errc::stratum_too_small,
                    "stratum '" + label + "' cannot be tested: " + e.what());
      throw;
    }
    out.combined_statistic += result.statistic;
    out.combined_df += result.df;
    out.per_stratum.push_back({label, std::move(result), 1.0});
  }
  for (auto& stratum : out.per_stratum)
    stratum.bonferroni_p = std::min(1.0, static_cast<double>(s) * stratum.result.p_value);
  out.combined_p = chi_sq_sf(out.combined_statistic, out.combined_df);
  return out;
}

}  // namespace structest
