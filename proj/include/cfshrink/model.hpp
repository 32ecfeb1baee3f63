#pragma once

#include <Eigen/Dense>

#include "cfshrink/rng.hpp"

namespace cfshrink {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Parameters of the structural two-stage model
//   Y_i = alpha   + X_i beta   + W_i' gamma   + U_i
//   X_i = alpha_x + Z_i' pi    + W_i' gamma_x + V_i
// with (U_i, V_i) bivariate Normal: scales (sigma, tau), correlation rho.
struct StructuralParams {
  double beta = 0.0;
  double alpha = 0.0;
  VectorXd gamma;    // length k
  double alpha_x = 0.0;
  VectorXd gamma_x;  // length k
  VectorXd pi;       // length ell >= 1
  double rho = 0.0;  // in (-1, 1)
  double sigma = 1.0;
  double tau = 1.0;

  int k() const { return static_cast<int>(gamma.size()); }
  int ell() const { return static_cast<int>(pi.size()); }
  void validate() const;  // throws config_error
};

struct ReducedFormParams {
  VectorXd pi_y;
  VectorXd gamma_y;
  Eigen::Matrix2d Sigma;  // reduced-form covariance of (Y_i, X_i)
};

// theta = (beta, mu, rho, sigma, tau) of the canonical model.
struct CanonicalParams {
  double beta = 0.0;
  VectorXd mu;  // length ell
  double rho = 0.0;
  double sigma = 1.0;
  double tau = 1.0;

  int ell() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

// The rotated observation (x*_z, x*_r, y*_z, y*_r) every estimator works on.
struct CanonicalData {
  VectorXd x_z, x_r, y_z, y_r;

  int ell() const { return static_cast<int>(x_z.size()); }
  int s() const { return static_cast<int>(x_r.size()); }
  VectorXd x_stacked() const;
  VectorXd y_stacked() const;
  void validate() const;
};

struct RawDataset {
  VectorXd y, x;
  MatrixXd z, w;
};

ReducedFormParams reduced_form(const StructuralParams& p);

// Draws one dataset at fixed (z, w). Deterministic given the rng state.
// The bivariate noise is built as U = sigma*e1, V = tau*(rho*e1 +
// sqrt(1-rho^2)*e2) with e1, e2 iid standard Normal, so cross-language
// reimplementations match in distribution.
RawDataset sample_raw(const StructuralParams& p, const MatrixXd& z,
                      const MatrixXd& w, RngStream& rng);

// X* ~ N((mu, 0_s), tau^2 I); Y* | X* = x ~ N(x beta + (x - (mu,0)) rho
// sigma / tau, (1 - rho^2) sigma^2 I). Draw order: x_z, x_r, y_z, y_r.
CanonicalData sample_canonical(const CanonicalParams& theta, int ell, int s,
                               RngStream& rng);

// Exact log p_theta(x*, y*) of the canonical model.
double log_density(const CanonicalParams& theta, const CanonicalData& d);

}  // namespace cfshrink
