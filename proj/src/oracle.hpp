#pragma once

#include <cstddef>
#include <vector>

#include "dataset.hpp"

namespace structest {

class IndicatorDataset;
struct RestrictedFit;

// Rank-1 approximation of a cell-mean matrix obtained by a route independent
// of the production alternating fit, used to cross-check that fit.
struct OracleFit {
  std::size_t n_indicators = 0;
  std::size_t n_groups = 0;
  std::vector<double> fitted_products;  // n x p row-major, rank <= 1
  double lack_of_fit = 0.0;             // sum_iz count[i][z] (mean[i][z] - product[i][z])^2

  double product(std::size_t i, std::size_t z) const {
    return fitted_products[i * n_groups + z];
  }
};

// Best count-weighted rank-1 approximation of the cell means. When cell
// counts are constant across indicators within each group (complete data),
// the solution is exact: the top singular pair of the sqrt(count)-scaled
// mean matrix, via eigen-decomposition of the smaller Gram matrix with a
// closed form for the 2x2 case. Otherwise the weights break the spectral
// structure and the oracle falls back to dense alternating refinement from
// 32 deterministic random restarts.
OracleFit weighted_rank1(const CellMeans& cm);

// Chi-squared upper tail for even df via the closed form
// exp(-x/2) * sum_{k<df/2} (x/2)^k / k!, evaluated in extended precision.
// Independent check on the incomplete-gamma route. df must be even, <= 20.
double chi_sq_sf_even(double x, std::size_t df);

// Agreement between the production fit's count-weighted lack of fit and the
// oracle's, on the same cell means.
struct OracleCheck {
  double oracle_lack_of_fit = 0.0;
  double fit_lack_of_fit = 0.0;
  double abs_diff = 0.0;
};

OracleCheck oracle_check(const IndicatorDataset& data, const RestrictedFit& fit);

// Count-weighted SSE of an arbitrary rank-1 candidate against the cell
// means; shared by oracle_check and the randomized-candidate tests.
double weighted_candidate_sse(const CellMeans& cm, const std::vector<double>& row_factor,
                              const std::vector<double>& col_factor);

}  // namespace structest
