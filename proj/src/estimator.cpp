#include "estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace structest {

namespace {

constexpr double kDegenerateNorm = 1e-12;

int find_group(const IndicatorDataset& data, const std::string& label) {
  const auto& names = data.group_names();
  for (std::size_t z = 0; z < names.size(); ++z)
    if (names[z] == label) return static_cast<int>(z);
  throw_error(errc::invalid_argument, "unknown group label '" + label + "'");
}

std::vector<double> group_mean_vector(const IndicatorDataset& data, int z) {
  const std::size_t n = data.num_indicators();
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    if (data.group_of(k) != z) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (data.missing(k, i)) continue;
      sums[i] += data.value(k, i);
      ++counts[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] == 0)
      throw_error(errc::empty_cell, "indicator '" + data.indicator_names()[i] +
                                        "' has no observations in group '" +
                                        data.group_names()[z] + "'");
    sums[i] /= static_cast<double>(counts[i]);
  }
  return sums;
}

double euclidean_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Default reference group: largest subject count among groups whose mean
// vector has norm >= 1e-12, ties broken by lowest group index. Returns -1
// when every group is degenerate.
int choose_reference_group(const IndicatorDataset& data) {
  std::vector<std::size_t> sizes(data.num_groups(), 0);
  for (std::size_t k = 0; k < data.num_subjects(); ++k)
    ++sizes[static_cast<std::size_t>(data.group_of(k))];

  int best = -1;
  std::size_t best_size = 0;
  for (std::size_t z = 0; z < data.num_groups(); ++z) {
    if (sizes[z] == 0) continue;
    const auto means = group_mean_vector(data, static_cast<int>(z));
    if (euclidean_norm(means) < kDegenerateNorm) continue;
    if (best < 0 || sizes[z] > best_size) {
      best = static_cast<int>(z);
      best_size = sizes[z];
    }
  }
  return best;
}

// Available-case sample variance (divisor M - 1) of all values about the
// grand mean; the pre-iteration reference point for the convergence check.
double overall_sample_variance(const IndicatorDataset& data) {
  double sum = 0.0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    for (std::size_t i = 0; i < data.num_indicators(); ++i) {
      if (data.missing(k, i)) continue;
      sum += data.value(k, i);
      ++m;
    }
  }
  if (m < 2) return std::numeric_limits<double>::infinity();
  const double mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (std::size_t k = 0; k < data.num_subjects(); ++k)
    for (std::size_t i = 0; i < data.num_indicators(); ++i)
      if (!data.missing(k, i)) {
        const double d = data.value(k, i) - mean;
        ss += d * d;
      }
  return ss / static_cast<double>(m - 1);
}

void normalize(RestrictedFit& fit) {
  const double norm = euclidean_norm(fit.alpha);
  if (norm <= 0.0) return;
  const double scale = std::sqrt(static_cast<double>(fit.alpha.size())) / norm;
  for (auto& a : fit.alpha) a *= scale;
  for (auto& b : fit.beta) b /= scale;

  std::size_t lead = 0;
  for (std::size_t i = 1; i < fit.alpha.size(); ++i)
    if (std::fabs(fit.alpha[i]) > std::fabs(fit.alpha[lead])) lead = i;
  if (fit.alpha[lead] < 0.0) {
    for (auto& a : fit.alpha) a = -a;
    for (auto& b : fit.beta) b = -b;
  }
}

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

std::vector<double> init_alpha(const IndicatorDataset& data, const std::string& ref_group) {
  const int z = find_group(data, ref_group);
  bool has_subject = false;
  for (std::size_t k = 0; k < data.num_subjects() && !has_subject; ++k)
    has_subject = data.group_of(k) == z;
  if (!has_subject)
    throw_error(errc::invalid_argument, "reference group '" + ref_group + "' has no subjects");
  auto means = group_mean_vector(data, z);
  if (euclidean_norm(means) < kDegenerateNorm)
    throw_error(errc::degenerate_initialization,
                "all indicator means in reference group '" + ref_group +
                    "' are below 1e-12 in magnitude");
  return means;
}

std::vector<double> update_beta(const std::vector<double>& alpha, const IndicatorDataset& data) {
  const std::size_t n = data.num_indicators();
  const std::size_t p = data.num_groups();
  std::vector<double> num(p, 0.0), den(p, 0.0);
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    const auto z = static_cast<std::size_t>(data.group_of(k));
    for (std::size_t i = 0; i < n; ++i) {
      if (data.missing(k, i)) continue;
      num[z] += alpha[i] * data.value(k, i);
      den[z] += alpha[i] * alpha[i];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t z = 0; z < p; ++z) {
    if (den[z] <= 0.0)
      throw_error(errc::zero_denominator,
                  "beta update has zero denominator for group '" + data.group_names()[z] + "'");
    beta[z] = num[z] / den[z];
  }
  return beta;
}

std::vector<double> update_alpha(const std::vector<double>& beta, const IndicatorDataset& data) {
  const std::size_t n = data.num_indicators();
  std::vector<double> num(n, 0.0), den(n, 0.0);
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    const double b = beta[static_cast<std::size_t>(data.group_of(k))];
    for (std::size_t i = 0; i < n; ++i) {
      if (data.missing(k, i)) continue;
      num[i] += b * data.value(k, i);
      den[i] += b * b;
    }
  }
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (den[i] <= 0.0)
      throw_error(errc::zero_denominator, "alpha update has zero denominator for indicator '" +
                                              data.indicator_names()[i] + "'");
    alpha[i] = num[i] / den[i];
  }
  return alpha;
}

double residual_mean_square(const IndicatorDataset& data, const std::vector<double>& alpha,
                            const std::vector<double>& beta) {
  double ss = 0.0;
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    const double b = beta[static_cast<std::size_t>(data.group_of(k))];
    for (std::size_t i = 0; i < data.num_indicators(); ++i) {
      if (data.missing(k, i)) continue;
      const double r = data.value(k, i) - alpha[i] * b;
      ss += r * r;
    }
  }
  return ss / static_cast<double>(data.observed_count());
}

RestrictedFit fit_restricted(const IndicatorDataset& data, const FitOptions& options) {
  // Reject empty cells up front; the saturated comparison needs them too.
  (void)cell_means(data);

  RestrictedFit fit;
  if (options.init_alpha) {
    if (options.init_alpha->size() != data.num_indicators())
      throw_error(errc::invalid_argument, "init_alpha length must equal the indicator count");
    fit.alpha = *options.init_alpha;
  } else if (options.ref_group) {
    try {
      fit.alpha = init_alpha(data, *options.ref_group);
    } catch (const Error& e) {
      if (e.code() != errc::degenerate_initialization) throw;
      // Requested group is degenerate; retry with the automatic rule.
      const int z = choose_reference_group(data);
      if (z >= 0) fit.alpha = group_mean_vector(data, z);
    }
  } else {
    const int z = choose_reference_group(data);
    if (z >= 0) fit.alpha = group_mean_vector(data, z);
  }

  if (fit.alpha.empty()) {
    // Every group's mean vector vanishes: the all-zero fit, flagged. The
    // fitted means are zero, so the residual mean square is the raw one.
    fit.alpha.assign(data.num_indicators(), 0.0);
    fit.beta.assign(data.num_groups(), 0.0);
    fit.sigma2_restricted = raw_mean_square(data);
    fit.mse_trace = {fit.sigma2_restricted};
    fit.converged = true;
    fit.degenerate = true;
    return fit;
  }

  double sigma_prev = overall_sample_variance(data);
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    fit.beta = update_beta(fit.alpha, data);
    fit.alpha = update_alpha(fit.beta, data);
    const double sigma2 = residual_mean_square(data, fit.alpha, fit.beta);
    fit.mse_trace.push_back(sigma2);
    fit.iterations = it;
    if (std::fabs(sigma2 - sigma_prev) < options.tol) {
      fit.converged = true;
      break;
    }
    sigma_prev = sigma2;
  }
  fit.sigma2_restricted = fit.mse_trace.back();
  normalize(fit);
  return fit;
}

SaturatedFit fit_saturated(const IndicatorDataset& data) {
  SaturatedFit fit;
  fit.cell_means = cell_means(data);
  double ss = 0.0;
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    const auto z = static_cast<std::size_t>(data.group_of(k));
    for (std::size_t i = 0; i < data.num_indicators(); ++i) {
      if (data.missing(k, i)) continue;
      const double r = data.value(k, i) - fit.cell_means.mean(i, z);
      ss += r * r;
    }
  }
  fit.sigma2_full = ss / static_cast<double>(data.observed_count());
  return fit;
}

}  // namespace structest
