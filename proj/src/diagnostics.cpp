#include "diagnostics.hpp"

#include <cmath>

#include "errors.hpp"

namespace structest {

ReliabilityVector ReliabilityVector::checked(std::vector<double> lambda) {
  if (lambda.empty()) throw_error(errc::invalid_argument, "empty reliability vector");
  for (double l : lambda)
    if (std::fabs(l) < 1e-12)
      throw_error(errc::invalid_argument, "reliabilities must all be nonzero");
  return ReliabilityVector{std::move(lambda)};
}

std::vector<double> scaled_contrasts(const CellMeans& cm, const ReliabilityVector& lambda,
                                     std::size_t z_ref) {
  if (lambda.lambda.size() != cm.n_indicators)
    throw_error(errc::invalid_argument, "reliability vector length must equal indicator count");
  if (z_ref >= cm.n_groups)
    throw_error(errc::invalid_argument, "reference group out of range");
  std::vector<double> out(cm.n_indicators * cm.n_groups);
  for (std::size_t i = 0; i < cm.n_indicators; ++i)
    for (std::size_t z = 0; z < cm.n_groups; ++z)
      out[i * cm.n_groups + z] = (cm.mean(i, z) - cm.mean(i, z_ref)) / lambda.lambda[i];
  return out;
}

std::vector<double> theorem1_residuals(const CellMeans& cm, const ReliabilityVector& lambda) {
  if (lambda.lambda.size() != cm.n_indicators)
    throw_error(errc::invalid_argument, "reliability vector length must equal indicator count");
  const std::size_t n = cm.n_indicators;
  const std::size_t p = cm.n_groups;
  std::vector<double> out(n * n * p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t z = 0; z < p; ++z)
        out[i * n * p + j * p + z] =
            lambda.lambda[i] * cm.mean(j, z) - lambda.lambda[j] * cm.mean(i, z);
  return out;
}

std::vector<double> implied_reliability_ratios(const RestrictedFit& fit,
                                               std::size_t ref_indicator) {
  if (ref_indicator >= fit.alpha.size())
    throw_error(errc::invalid_argument, "reference indicator out of range");
  const double ref = fit.alpha[ref_indicator];
  if (std::fabs(ref) < 1e-12)
    throw_error(errc::invalid_argument,
                "reference indicator has a near-zero fitted loading");
  std::vector<double> out(fit.alpha.size());
  for (std::size_t i = 0; i < fit.alpha.size(); ++i) out[i] = fit.alpha[i] / ref;
  return out;
}

}  // namespace structest
