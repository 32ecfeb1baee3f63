#include "cfshrink/canonical.hpp"

#include <cmath>
#include <string>

#include "cfshrink/errors.hpp"

namespace cfshrink {

namespace {

constexpr double kRankThreshold = 1e-10;

// Residualize the columns of m against an orthonormal block, twice; a single
// pass can leave O(cond * eps) leakage behind.
void residualize(MatrixXd& m, const MatrixXd& basis) {
  if (basis.cols() == 0) return;
  m -= basis * (basis.transpose() * m);
  m -= basis * (basis.transpose() * m);
}

// Orthonormalize the (already residualized) block; requires full column rank.
MatrixXd orthonormal_block(const MatrixXd& m, const std::string& label) {
  const int cols = static_cast<int>(m.cols());
  if (cols == 0) return MatrixXd(m.rows(), 0);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < cols) throw config_error(label);
  return qr.householderQ() * MatrixXd::Identity(m.rows(), cols);
}

}  // namespace

OrthoBasis build_basis(const MatrixXd& z, const MatrixXd& w) {
  const int n = static_cast<int>(z.rows());
  const int k = static_cast<int>(w.cols());
  const int ell = static_cast<int>(z.cols());
  if (ell < 1) throw config_error("z must have at least one column");
  if (k > 0 && w.rows() != n) throw config_error("z and w row counts disagree");
  if (1 + k + ell > n - 1)
    throw config_error("n too small: need 1 + k + ell <= n - 1");

  OrthoBasis b;
  b.q1 = VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));

  MatrixXd q1m = b.q1;
  MatrixXd wres = (k > 0) ? w : MatrixXd(n, 0);
  residualize(wres, q1m);
  b.qw = orthonormal_block(wres, "rank deficiency: w is collinear with 1");

  MatrixXd zres = z;
  residualize(zres, q1m);
  residualize(zres, b.qw);
  b.qz = orthonormal_block(zres, "rank deficiency: z is collinear with (1, w)");

  // Orthonormal completion: the trailing columns of the full Q of the
  // assembled (orthonormal) block.
  const int m = 1 + k + ell;
  MatrixXd assembled(n, m);
  assembled.col(0) = b.q1;
  if (k > 0) assembled.middleCols(1, k) = b.qw;
  assembled.rightCols(ell) = b.qz;
  Eigen::HouseholderQR<MatrixXd> full(assembled);
  MatrixXd tail = MatrixXd::Identity(n, n).rightCols(n - m);
  b.qr = full.householderQ() * tail;
  return b;
}

CanonicalData to_canonical(const RawDataset& d, const OrthoBasis& b) {
  if (d.x.size() != b.n() || d.y.size() != b.n())
    throw config_error("dataset size does not match basis");
  CanonicalData c;
  c.x_z = b.qz.transpose() * d.x;
  c.x_r = b.qr.transpose() * d.x;
  c.y_z = b.qz.transpose() * d.y;
  c.y_r = b.qr.transpose() * d.y;
  return c;
}

VectorXd canonical_mu(const VectorXd& pi, const MatrixXd& z, const OrthoBasis& b) {
  if (z.rows() != b.n() || z.cols() != pi.size())
    throw config_error("pi/z dimensions do not match basis");
  return b.qz.transpose() * (z * pi);
}

}  // namespace cfshrink
