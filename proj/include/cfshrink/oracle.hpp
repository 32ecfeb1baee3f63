#pragma once

#include <utility>

#include <Eigen/Dense>

#include "cfshrink/model.hpp"

namespace cfshrink {

// Exact analytic bias quantities. kappa = ||mu||^2 / (2 tau^2) indexes the
// Poisson mixture K ~ Poisson(kappa):
//   P = E[(ell-2)/(ell-2+2K)],  Q = E[2 kappa/(ell-2+2K)],
//   B(lambda) = P - (lambda/2)(P + Q - 1),  lambda_star = 2P/(P+Q-1).
struct BiasReport {
  int ell = 0;
  double kappa = 0.0;
  double P = 0.0;
  double Q = 0.0;
  double lambda = 0.0;
  double B = 0.0;            // rescaled bias at lambda
  double lambda_star = 0.0;  // +infinity when kappa == 0
  double bias_unscaled = 0.0;  // B * rho * sigma / tau
};

// Conditional bias of the control-function shrinkage estimator at x* with
// scalar factor c != 0 (depends on the x-part only through x_z):
//   (1 - (1/c) (x_z' mu) / (x_z' x_z)) * rho * sigma / tau
double conditional_bias(const CanonicalParams& theta, const VectorXd& x_z,
                        double c);

// E[weight' Y* | X* = (x_z, x_r)] for a rule that is linear in y* at this x*:
// weight' (x beta + (x - (mu, 0)) rho sigma / tau).
double conditional_mean(const CanonicalParams& theta, const VectorXd& x_z,
                        const VectorXd& x_r, const VectorXd& weight);

// Poisson-mixture series, truncated with a Chernoff-certified tail < 1e-13.
// Refuses kappa > 1e6 rather than silently switching approximations.
std::pair<double, double> poisson_PQ(int ell, double kappa);

double bias_B(int ell, double kappa, double lambda);

// 2P/(P+Q-1); returns +infinity when kappa == 0 (B is constant there).
double lambda_star(int ell, double kappa);

// E[(a + K)^-1] for K ~ Poisson(nu), a >= 1.
double poisson_inverse_moment(double a, double nu);

// The proved upper bound 1/(a + nu - 1), exposed for test assertions.
double poisson_inverse_moment_bound(double a, double nu);

BiasReport bias_report(int ell, double kappa, double lambda, double rho,
                       double sigma, double tau);

}  // namespace cfshrink
