#pragma once

#include <cstddef>
#include <vector>

#include "dataset.hpp"
#include "estimator.hpp"

namespace structest {

// Per-indicator loadings supplied by the caller (e.g. from prior
// psychometric work) or taken from the restricted fit's normalized alpha.
// The module never estimates loadings from a factor model itself.
struct ReliabilityVector {
  std::vector<double> lambda;

  // Enforces the all-nonzero assumption (magnitude >= 1e-12).
  static ReliabilityVector checked(std::vector<double> lambda);
};

// Entry (i, z) = (mean[i][z] - mean[i][z_ref]) / lambda_i. When a single
// latent carries every group difference, each column is constant across
// indicators up to sampling error.
std::vector<double> scaled_contrasts(const CellMeans& cm, const ReliabilityVector& lambda,
                                     std::size_t z_ref);

// Entry (i, j, z) = lambda_i * mean[j][z] - lambda_j * mean[i][z], laid out
// as i*(n*p) + j*p + z. Exactly antisymmetric in (i, j); identically zero at
// the population level when the rank-1 structure holds.
std::vector<double> theorem1_residuals(const CellMeans& cm, const ReliabilityVector& lambda);

// alpha_i / alpha_ref from a restricted fit: consistent estimates of the
// loading ratios lambda_i / lambda_ref under the rank-1 null. Invariant to
// the fit's normalization.
std::vector<double> implied_reliability_ratios(const RestrictedFit& fit, std::size_t ref_indicator);

}  // namespace structest
