#pragma once

#include <cstddef>

namespace structest {

// Regularized upper incomplete gamma function Q(a, x) = Γ(a, x) / Γ(a) for
// a > 0, x >= 0. Series expansion below the a + 1 crossover, Lentz continued
// fraction above it.
double gamma_q(double a, double x);

// Upper-tail probability of the chi-squared distribution with `df` degrees
// of freedom, evaluated as Q(df/2, x/2). Absolute error stays below 1e-12
// for df <= 200, x <= 1e4.
double chi_sq_sf(double x, std::size_t df);

}  // namespace structest
