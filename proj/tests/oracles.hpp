#pragma once

#include <Eigen/Dense>

#include "mlmrt/design.hpp"
#include "mlmrt/trend.hpp"

// Brute-force references that share no code with the library.
namespace oracle {

// CDFs by adaptive tanh-sinh quadrature of the density. The noncentral χ²
// density is the Bessel form; the noncentral F CDF integrates the central χ²
// denominator density against the noncentral χ² CDF oracle.
double chisq_cdf(double x, double k);
double f_cdf(double x, double d1, double d2);
double nc_chisq_cdf(double x, double k, double lambda);
double nc_f_cdf(double x, double d1, double d2, double lambda);

// Σ_t E[I·X Xᵀ] with the expectation taken by enumerating availability and
// every assignment outcome at each time point.
Eigen::MatrixXd q_enumeration(const mlmrt::DesignSpec& design, const mlmrt::EffectTrend& trend);

// Effect basis written out from the shape definitions.
Eigen::VectorXd z(const mlmrt::EffectTrend& trend, int level, double s);

}  // namespace oracle
