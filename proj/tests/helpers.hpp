#pragma once

// Test-only oracles, kept independent of the implementation paths they
// check: regressions are solved via explicitly formed normal equations and
// projection matrices, never via the library's QR/closed-form routines.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "cfshrink/model.hpp"
#include "cfshrink/rng.hpp"

namespace testutil {

using cfshrink::CanonicalData;
using cfshrink::CanonicalParams;
using cfshrink::RawDataset;
using cfshrink::RngStream;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// least squares of y on columns of A via normal equations; full coefficient vector
inline VectorXd normal_eq_solve(const MatrixXd& A, const VectorXd& y) {
  return (A.transpose() * A).fullPivLu().solve(A.transpose() * y);
}

// coefficient on c0 in least squares of y on (c0, c1)
inline double two_regressor_coef(const VectorXd& y, const VectorXd& c0,
                                 const VectorXd& c1) {
  MatrixXd A(y.size(), 2);
  A.col(0) = c0;
  A.col(1) = c1;
  return normal_eq_solve(A, y)(0);
}

inline MatrixXd projection(const MatrixXd& A) {
  if (A.cols() == 0) return MatrixXd::Zero(A.rows(), A.rows());
  return A * (A.transpose() * A).ldlt().solve(A.transpose());
}

inline MatrixXd with_intercept(const MatrixXd& w) {
  MatrixXd A(w.rows(), 1 + w.cols());
  A.col(0).setOnes();
  if (w.cols() > 0) A.rightCols(w.cols()) = w;
  return A;
}

// classical 2SLS with intercept and controls: first stage projects x on
// (1, w, z), second stage regresses y on (1, w, xhat)
inline double classical_tsls(const RawDataset& d) {
  MatrixXd A1(d.z.rows(), 1 + d.w.cols() + d.z.cols());
  A1.col(0).setOnes();
  if (d.w.cols() > 0) A1.middleCols(1, d.w.cols()) = d.w;
  A1.rightCols(d.z.cols()) = d.z;
  const VectorXd xhat = projection(A1) * d.x;
  MatrixXd A2(d.z.rows(), 1 + d.w.cols() + 1);
  A2.col(0).setOnes();
  if (d.w.cols() > 0) A2.middleCols(1, d.w.cols()) = d.w;
  A2.rightCols(1) = xhat;
  return normal_eq_solve(A2, d.y)(A2.cols() - 1);
}

// coefficient on x in least squares of y on (1, w, x)
inline double classical_ols(const RawDataset& d) {
  MatrixXd A(d.x.size(), 1 + d.w.cols() + 1);
  A.col(0).setOnes();
  if (d.w.cols() > 0) A.middleCols(1, d.w.cols()) = d.w;
  A.rightCols(1) = d.x;
  return normal_eq_solve(A, d.y)(A.cols() - 1);
}

// log joint Gaussian density of the stacked (x*, y*) under the reduced-form
// covariance, assembled as a dense 2m x 2m matrix
inline double joint_gaussian_log_density(const CanonicalParams& th,
                                         const CanonicalData& d) {
  const int m = d.ell() + d.s();
  VectorXd mean_x = VectorXd::Zero(m);
  mean_x.head(d.ell()) = th.mu;
  const double slope = th.beta + th.rho * th.sigma / th.tau;
  const double t2 = th.tau * th.tau;

  MatrixXd cov = MatrixXd::Zero(2 * m, 2 * m);
  cov.topLeftCorner(m, m) = t2 * MatrixXd::Identity(m, m);
  cov.topRightCorner(m, m) = t2 * slope * MatrixXd::Identity(m, m);
  cov.bottomLeftCorner(m, m) = t2 * slope * MatrixXd::Identity(m, m);
  cov.bottomRightCorner(m, m) =
      (slope * slope * t2 + (1.0 - th.rho * th.rho) * th.sigma * th.sigma) *
      MatrixXd::Identity(m, m);

  VectorXd resid(2 * m);
  resid.head(m) = d.x_stacked() - mean_x;
  resid.tail(m) = d.y_stacked() - mean_x * th.beta;

  const auto ldlt = cov.ldlt();
  const double quad = resid.dot(ldlt.solve(resid));
  const double logdet = ldlt.vectorD().array().log().sum();
  constexpr double log2pi = 1.8378770664093454836;
  return -0.5 * (2 * m * log2pi + logdet + quad);
}

inline long poisson_draw(RngStream& rng, double nu) {
  const double limit = std::exp(-nu);
  long k = 0;
  double prod = rng.uniform01();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform01();
  }
  return k;
}

inline VectorXd random_vector(RngStream& rng, int n) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline MatrixXd random_matrix(RngStream& rng, int n, int m) {
  MatrixXd a(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = rng.normal();
  return a;
}

inline CanonicalData random_canonical_data(RngStream& rng, int ell, int s) {
  CanonicalData d;
  d.x_z = random_vector(rng, ell);
  d.x_r = random_vector(rng, s);
  d.y_z = random_vector(rng, ell);
  d.y_r = random_vector(rng, s);
  return d;
}

inline CanonicalParams random_theta(RngStream& rng, int ell) {
  CanonicalParams th;
  th.beta = rng.normal();
  th.rho = 1.8 * rng.uniform01() - 0.9;
  th.sigma = std::exp(0.5 * (rng.uniform01() - 0.5));
  th.tau = std::exp(0.5 * (rng.uniform01() - 0.5));
  th.mu = random_vector(rng, ell);
  return th;
}

struct MeanVar {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se_of_mean() const { return std::sqrt(variance() / static_cast<double>(n)); }
};

}  // namespace testutil
