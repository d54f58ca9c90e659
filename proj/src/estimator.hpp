#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace structest {

// Fit of the restricted bilinear mean model E(X_i | Z = z) = alpha_i beta_z
// by alternating exact conditional least-squares updates.
//
// Reported parameters are normalized so that ||alpha|| = sqrt(n) and the
// first largest-magnitude alpha entry is positive; only the products
// alpha_i beta_z are contract-bearing (the model is invariant to the
// rescaling alpha/tau, beta*tau).
struct RestrictedFit {
  std::vector<double> alpha;
  std::vector<double> beta;
  double sigma2_restricted = 0.0;  // residual mean square, divisor M
  std::size_t iterations = 0;
  std::vector<double> mse_trace;  // residual mean square after each full iteration
  bool converged = false;
  bool degenerate = false;  // all group means vanished; alpha = beta = 0
};

// Saturated cell-means fit: fitted value for (i, z) is the cell mean.
struct SaturatedFit {
  CellMeans cell_means;
  double sigma2_full = 0.0;  // residual mean square, divisor M
};

struct FitOptions {
  double tol = 1e-9;          // absolute change in residual mean square
  std::size_t max_iter = 500;
  std::optional<std::string> ref_group;         // initialization group label
  std::optional<std::vector<double>> init_alpha;  // explicit start, overrides ref_group
};

// Initial alpha: per-indicator mean of non-missing values in the reference
// group. Throws errc::degenerate_initialization when every such mean has
// magnitude below 1e-12.
std::vector<double> init_alpha(const IndicatorDataset& data, const std::string& ref_group);

// One conditional minimization for beta holding alpha fixed:
// beta_z = sum_{i,k obs, Z_k=z} alpha_i X_ik / sum_{i,k obs, Z_k=z} alpha_i^2.
std::vector<double> update_beta(const std::vector<double>& alpha, const IndicatorDataset& data);

// One conditional minimization for alpha holding beta fixed:
// alpha_i = sum_{k obs} beta_{Z_k} X_ik / sum_{k obs} beta_{Z_k}^2.
std::vector<double> update_alpha(const std::vector<double>& beta, const IndicatorDataset& data);

// Alternates update_beta / update_alpha until the residual mean square
// changes by less than tol, or max_iter is reached (fit returned with
// converged = false). When every group's mean vector is degenerate the
// all-zero fit is returned with the degenerate flag set.
RestrictedFit fit_restricted(const IndicatorDataset& data, const FitOptions& options = {});

SaturatedFit fit_saturated(const IndicatorDataset& data);

// Residual mean square of the bilinear model over non-missing entries.
double residual_mean_square(const IndicatorDataset& data, const std::vector<double>& alpha,
                            const std::vector<double>& beta);

}  // namespace structest
