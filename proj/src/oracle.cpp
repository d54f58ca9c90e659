#include "oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "errors.hpp"
#include "estimator.hpp"

namespace structest {

namespace {

bool counts_uniform_within_groups(const CellMeans& cm) {
  for (std::size_t z = 0; z < cm.n_groups; ++z)
    for (std::size_t i = 1; i < cm.n_indicators; ++i)
      if (cm.count(i, z) != cm.count(0, z)) return false;
  return true;
}

// Top eigenpair of a symmetric positive semi-definite matrix. Closed form
// for the 2x2 case, Eigen's self-adjoint solver otherwise.
std::pair<double, Eigen::VectorXd> top_eigenpair(const Eigen::MatrixXd& g) {
  if (g.rows() == 1) {
    Eigen::VectorXd v(1);
    v << 1.0;
    return {g(0, 0), v};
  }
  if (g.rows() == 2) {
    const double tr = g(0, 0) + g(1, 1);
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    const double lambda = (tr + disc) / 2.0;
    // Eigenvector from whichever row of (G - lambda I) is better conditioned.
    Eigen::VectorXd v(2);
    if (std::fabs(g(0, 1)) >= std::fabs(lambda - g(0, 0)))
      v << g(0, 1), lambda - g(0, 0);
    else
      v << lambda - g(1, 1), g(1, 0);
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    else v << 1.0, 0.0;  // diagonal matrix, axis-aligned eigenvector
    return {lambda, v};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
  const auto idx = g.rows() - 1;  // eigenvalues sorted ascending
  return {solver.eigenvalues()(idx), solver.eigenvectors().col(idx)};
}

OracleFit spectral_rank1(const CellMeans& cm) {
  const auto n = static_cast<Eigen::Index>(cm.n_indicators);
  const auto p = static_cast<Eigen::Index>(cm.n_groups);

  // Scale column z by sqrt(count_z): the weighted problem becomes a plain
  // Frobenius best rank-1 approximation of the scaled matrix.
  Eigen::MatrixXd s(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index z = 0; z < p; ++z)
      s(i, z) = std::sqrt(static_cast<double>(cm.count(i, z))) * cm.mean(i, z);

  const bool gram_on_cols = p <= n;
  const Eigen::MatrixXd gram = gram_on_cols ? Eigen::MatrixXd(s.transpose() * s)
                                            : Eigen::MatrixXd(s * s.transpose());
  auto [lambda1, w] = top_eigenpair(gram);

  Eigen::VectorXd u, v;
  if (gram_on_cols) {
    v = w;
    u = s * v;  // length sigma_1
  } else {
    u = w;
    v = s.transpose() * u;
  }
  const Eigen::MatrixXd approx = u * v.transpose();

  OracleFit fit;
  fit.n_indicators = cm.n_indicators;
  fit.n_groups = cm.n_groups;
  fit.fitted_products.assign(cm.n_indicators * cm.n_groups, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index z = 0; z < p; ++z) {
      const double scale = std::sqrt(static_cast<double>(cm.count(i, z)));
      fit.fitted_products[static_cast<std::size_t>(i) * cm.n_groups + z] =
          scale > 0.0 ? approx(i, z) / scale : 0.0;
    }
  }
  fit.lack_of_fit = std::max(0.0, s.squaredNorm() - lambda1);
  return fit;
}

// Weighted alternating refinement for non-uniform counts: minimize
// sum_iz w_iz (mean_iz - a_i b_z)^2 from deterministic random restarts.
OracleFit restart_rank1(const CellMeans& cm) {
  const std::size_t n = cm.n_indicators;
  const std::size_t p = cm.n_groups;
  constexpr int kRestarts = 32;
  constexpr int kInnerIterations = 500;
  constexpr double kRelTol = 1e-13;

  std::vector<double> best_a, best_b;
  double best_sse = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(0x0c0ffee5u);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int r = 0; r < kRestarts; ++r) {
    std::vector<double> a(n), b(p, 0.0);
    for (auto& ai : a) ai = gauss(rng);

    double prev = std::numeric_limits<double>::infinity();
    bool degenerate = false;
    for (int it = 0; it < kInnerIterations && !degenerate; ++it) {
      for (std::size_t z = 0; z < p; ++z) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto w = static_cast<double>(cm.count(i, z));
          num += w * a[i] * cm.mean(i, z);
          den += w * a[i] * a[i];
        }
        if (den <= 0.0) { degenerate = true; break; }
        b[z] = num / den;
      }
      if (degenerate) break;
      for (std::size_t i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0;
        for (std::size_t z = 0; z < p; ++z) {
          const auto w = static_cast<double>(cm.count(i, z));
          num += w * b[z] * cm.mean(i, z);
          den += w * b[z] * b[z];
        }
        if (den <= 0.0) { degenerate = true; break; }
        a[i] = num / den;
      }
      if (degenerate) break;
      const double sse = weighted_candidate_sse(cm, a, b);
      if (prev - sse <= kRelTol * std::max(1.0, prev)) { prev = sse; break; }
      prev = sse;
    }
    if (degenerate) continue;
    const double sse = weighted_candidate_sse(cm, a, b);
    if (sse < best_sse) {
      best_sse = sse;
      best_a = a;
      best_b = b;
    }
  }
  if (best_a.empty())
    throw_error(errc::zero_denominator, "rank-1 refinement degenerated in every restart");

  OracleFit fit;
  fit.n_indicators = n;
  fit.n_groups = p;
  fit.fitted_products.assign(n * p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t z = 0; z < p; ++z)
      fit.fitted_products[i * p + z] = best_a[i] * best_b[z];
  fit.lack_of_fit = best_sse;
  return fit;
}

}  // namespace

double weighted_candidate_sse(const CellMeans& cm, const std::vector<double>& row_factor,
                              const std::vector<double>& col_factor) {
  double sse = 0.0;
  for (std::size_t i = 0; i < cm.n_indicators; ++i) {
    for (std::size_t z = 0; z < cm.n_groups; ++z) {
      const double r = cm.mean(i, z) - row_factor[i] * col_factor[z];
      sse += static_cast<double>(cm.count(i, z)) * r * r;
    }
  }
  return sse;
}

OracleFit weighted_rank1(const CellMeans& cm) {
  for (std::size_t i = 0; i < cm.n_indicators; ++i)
    for (std::size_t z = 0; z < cm.n_groups; ++z)
      if (cm.count(i, z) == 0)
        throw_error(errc::empty_cell, "cell means contain an empty cell");
  if (counts_uniform_within_groups(cm)) return spectral_rank1(cm);
  return restart_rank1(cm);
}

double chi_sq_sf_even(double x, std::size_t df) {
  if (df == 0 || df % 2 != 0 || df > 20)
    throw_error(errc::invalid_argument, "chi_sq_sf_even requires even df in [2, 20]");
  if (!(x >= 0.0)) throw_error(errc::invalid_argument, "chi_sq_sf_even requires x >= 0");
  const long double half = static_cast<long double>(x) / 2.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (std::size_t k = 1; k < df / 2; ++k) {
    term *= half / static_cast<long double>(k);
    sum += term;
  }
  return static_cast<double>(expl(-half) * sum);
}

OracleCheck oracle_check(const IndicatorDataset& data, const RestrictedFit& fit) {
  const CellMeans cm = cell_means(data);
  const OracleFit oracle = weighted_rank1(cm);
  OracleCheck check;
  check.oracle_lack_of_fit = oracle.lack_of_fit;
  check.fit_lack_of_fit = weighted_candidate_sse(cm, fit.alpha, fit.beta);
  check.abs_diff = std::fabs(check.fit_lack_of_fit - check.oracle_lack_of_fit);
  return check;
}

}  // namespace structest
