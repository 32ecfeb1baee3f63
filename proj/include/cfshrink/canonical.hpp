#pragma once

#include <Eigen/Dense>

#include "cfshrink/model.hpp"

namespace cfshrink {

// Nested orthonormal basis q = (q_1, q_w, q_z, q_r):
//   span(q1) = span(1), span(q1, qw) = span(1, w),
//   span(q1, qw, qz) = span(1, w, z), qr completes to an orthonormal basis.
struct OrthoBasis {
  VectorXd q1;  // n
  MatrixXd qw;  // n x k
  MatrixXd qz;  // n x ell
  MatrixXd qr;  // n x s, s = n - 1 - k - ell

  int n() const { return static_cast<int>(q1.size()); }
  int k() const { return static_cast<int>(qw.cols()); }
  int ell() const { return static_cast<int>(qz.cols()); }
  int s() const { return static_cast<int>(qr.cols()); }
};

// Householder QR with column pivoting per block (1 | w | z); rank decided by
// pivot magnitude > 1e-10 * largest pivot. q1 is fixed to +1/sqrt(n).
OrthoBasis build_basis(const MatrixXd& z, const MatrixXd& w);

CanonicalData to_canonical(const RawDataset& d, const OrthoBasis& b);

// mu = qz' z pi
VectorXd canonical_mu(const VectorXd& pi, const MatrixXd& z, const OrthoBasis& b);

}  // namespace cfshrink
