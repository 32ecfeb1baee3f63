#pragma once

#include <string>

#include <Eigen/Dense>

#include "cfshrink/model.hpp"

namespace cfshrink {

enum class Shrinkage { none, james_stein, james_stein_positive, harmonic };

std::string shrinkage_name(Shrinkage v);
Shrinkage shrinkage_from_name(const std::string& name);

// First-stage shrinkage factor c(.) with tuning constant p >= 0.
// variant == none or p == 0 force c == 1.
struct ShrinkageSpec {
  Shrinkage variant = Shrinkage::none;
  double p = 0.0;
};

// Bias-safe default tuning: p = (ell - 2) / s, i.e. lambda = ell - 2.
double default_tuning(int ell, int s);

// c as a function of (||x_z||^2, ||x_r||^2):
//   none                 -> 1
//   james_stein          -> 1 - p * sq_r / sq_z          (can cross zero)
//   james_stein_positive -> max(0, 1 - p * sq_r / sq_z)
//   harmonic             -> sq_z / (sq_z + p * sq_r)     in (0, 1]
double shrinkage_factor(const ShrinkageSpec& spec, double sq_z, double sq_r);

// Coefficient on x* in least squares of y* on (x*, x* - (mu_hat, 0)).
// Solved by QR on the (ell+s) x 2 design; rank-2 gate on singular values.
double cf_beta(const CanonicalData& d, const VectorXd& mu_hat);

// Control-function shrinkage estimator, equal to cf_beta(d, c * x_z) with
// c = shrinkage_factor(spec, ||x_z||^2, ||x_r||^2). Computed via the closed
// form x'a(x)y / x'a(x)x with a(x) = I - b(b'b)^{-1}b', b = ((1-c)x_z, x_r).
double shrink_iv_beta(const CanonicalData& d, const ShrinkageSpec& spec);

// (y_z' x_z) / (x_z' x_z)
double tsls_beta(const CanonicalData& d);

// (y*' x*) / (x*' x*) over the stacked vectors
double ols_beta(const CanonicalData& d);

}  // namespace cfshrink
