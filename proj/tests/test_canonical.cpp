#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfshrink/canonical.hpp"
#include "cfshrink/errors.hpp"
#include "cfshrink/estimators.hpp"
#include "cfshrink/invariance.hpp"
#include "cfshrink/model.hpp"
#include "helpers.hpp"

using namespace cfshrink;
using namespace testutil;

namespace {

MatrixXd assemble(const OrthoBasis& b) {
  MatrixXd q(b.n(), 1 + b.k() + b.ell() + b.s());
  q.col(0) = b.q1;
  if (b.k() > 0) q.middleCols(1, b.k()) = b.qw;
  q.middleCols(1 + b.k(), b.ell()) = b.qz;
  q.rightCols(b.s()) = b.qr;
  return q;
}

}  // namespace

TEST_CASE("build_basis: hand-checkable n=4, k=0, ell=1 case") {
  MatrixXd z(4, 1);
  z << 1, -1, 0, 0;
  const OrthoBasis b = build_basis(z, MatrixXd(4, 0));
  CHECK(b.s() == 2);
  for (int i = 0; i < 4; ++i) CHECK(b.q1(i) == doctest::Approx(0.5));
  // qz proportional to z/sqrt(2) (sign free)
  CHECK(std::abs(b.qz.col(0).dot(z.col(0)) / std::sqrt(2.0)) == doctest::Approx(1.0));
  const MatrixXd q = assemble(b);
  CHECK((q.transpose() * q - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("build_basis: Gram matrix is the identity and spans nest correctly") {
  RngStream rng(53, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12 + static_cast<int>(rng.uniform01() * 40);
    const int k = static_cast<int>(rng.uniform01() * 4);
    const int ell = 1 + static_cast<int>(rng.uniform01() * 5);
    const MatrixXd z = random_matrix(rng, n, ell);
    const MatrixXd w = random_matrix(rng, n, k);
    const OrthoBasis b = build_basis(z, w);

    const MatrixXd q = assemble(b);
    CHECK((q.transpose() * q - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);

    // span(q1, qw, qz) must reproduce z (projection oracle via normal equations)
    MatrixXd head(n, 1 + k + ell);
    head.col(0) = b.q1;
    if (k > 0) head.middleCols(1, k) = b.qw;
    head.rightCols(ell) = b.qz;
    CHECK((projection(head) * z - z).cwiseAbs().maxCoeff() <= 1e-8);

    // span(q1, qw) must reproduce (1, w)
    MatrixXd head_w(n, 1 + k);
    head_w.col(0) = b.q1;
    if (k > 0) head_w.rightCols(k) = b.qw;
    const MatrixXd ones_w = with_intercept(w);
    CHECK((projection(head_w) * ones_w - ones_w).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("build_basis identifies the offending block on rank deficiency") {
  RngStream rng(59, 0);
  const int n = 20;
  MatrixXd z = random_matrix(rng, n, 3);
  MatrixXd w = random_matrix(rng, n, 2);

  SUBCASE("w collinear with 1") {
    w.col(1).setConstant(2.5);
    CHECK_THROWS_WITH_AS(build_basis(z, w),
                         "rank deficiency: w is collinear with 1", config_error);
  }
  SUBCASE("z collinear with (1, w)") {
    z.col(2) = 0.5 * w.col(0) - w.col(1);
    CHECK_THROWS_WITH_AS(build_basis(z, w),
                         "rank deficiency: z is collinear with (1, w)", config_error);
  }
  SUBCASE("n too small") {
    CHECK_THROWS_AS(build_basis(z.topRows(6), w.topRows(6)), config_error);
  }
}

TEST_CASE("to_canonical: linearity, annihilation of span(1, w), Pythagoras") {
  RngStream rng(61, 0);
  const int n = 25, k = 2, ell = 3;
  const MatrixXd z = random_matrix(rng, n, ell);
  const MatrixXd w = random_matrix(rng, n, k);
  const OrthoBasis b = build_basis(z, w);

  RawDataset d;
  d.z = z;
  d.w = w;
  d.x = random_vector(rng, n);
  d.y = d.x;
  const CanonicalData same = to_canonical(d, b);
  CHECK((same.y_z - same.x_z).norm() == 0.0);
  CHECK((same.y_r - same.x_r).norm() == 0.0);

  RawDataset in_span = d;
  in_span.x = 1.5 * VectorXd::Ones(n) - 2.0 * w.col(0) + 0.25 * w.col(1);
  in_span.y = random_vector(rng, n);
  const CanonicalData c0 = to_canonical(in_span, b);
  CHECK(c0.x_z.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(c0.x_r.cwiseAbs().maxCoeff() <= 1e-10);

  const CanonicalData c = to_canonical(d, b);
  const MatrixXd p1w = projection(with_intercept(w));
  const VectorXd resid = d.x - p1w * d.x;
  CHECK(std::abs(c.x_z.squaredNorm() + c.x_r.squaredNorm() - resid.squaredNorm()) <= 1e-8);
}

TEST_CASE("canonical_mu: zero case and norm identity") {
  RngStream rng(67, 0);
  const int n = 30, k = 2, ell = 4;
  const MatrixXd z = random_matrix(rng, n, ell);
  const MatrixXd w = random_matrix(rng, n, k);
  const OrthoBasis b = build_basis(z, w);

  CHECK(canonical_mu(VectorXd::Zero(ell), z, b).norm() == 0.0);

  const VectorXd pi = random_vector(rng, ell);
  const VectorXd mu = canonical_mu(pi, z, b);
  const VectorXd zpi = z * pi;
  const VectorXd resid = zpi - projection(with_intercept(w)) * zpi;
  CHECK(std::abs(mu.norm() - resid.norm()) <= 1e-8);
}

TEST_CASE("canonical_mu agrees with the Monte Carlo mean of x_z") {
  StructuralParams p;
  p.beta = 0.4;
  p.alpha = 0.2;
  p.gamma = VectorXd::Zero(1);
  p.gamma_x = VectorXd::Ones(1) * 0.6;
  p.pi = Eigen::Vector2d(1.0, -0.5);
  p.rho = 0.3;
  p.sigma = 1.0;
  p.tau = 0.7;
  RngStream rng(71, 0);
  const int n = 16;
  const MatrixXd z = random_matrix(rng, n, 2);
  const MatrixXd w = random_matrix(rng, n, 1);
  const OrthoBasis b = build_basis(z, w);
  const VectorXd mu = canonical_mu(p.pi, z, b);

  const int reps = 100000;
  std::vector<MeanVar> acc(2);
  for (int r = 0; r < reps; ++r) {
    RngStream draw(71, static_cast<std::uint64_t>(r) + 1);
    const CanonicalData c = to_canonical(sample_raw(p, z, w, draw), b);
    for (int i = 0; i < 2; ++i) acc[i].add(c.x_z(i));
  }
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(acc[i].mean - mu(i)) <= 3.0 * acc[i].se_of_mean());
}

TEST_CASE("pipeline equivalence: raw->canonical law matches sample_canonical") {
  StructuralParams p;
  p.beta = 0.8;
  p.alpha = -0.1;
  p.gamma = VectorXd::Ones(1) * 0.9;
  p.gamma_x = VectorXd::Ones(1) * -0.3;
  p.pi = Eigen::Vector2d(0.7, 0.2);
  p.rho = 0.5;
  p.sigma = 1.2;
  p.tau = 0.8;
  RngStream rng(73, 0);
  const int n = 10;  // s = 10 - 1 - 1 - 2 = 6
  const MatrixXd z = random_matrix(rng, n, 2);
  const MatrixXd w = random_matrix(rng, n, 1);
  const OrthoBasis b = build_basis(z, w);

  CanonicalParams theta;
  theta.beta = p.beta;
  theta.mu = canonical_mu(p.pi, z, b);
  theta.rho = p.rho;
  theta.sigma = p.sigma;
  theta.tau = p.tau;

  const int reps = 40000;
  MeanVar raw_xz, raw_yz, raw_xr_sq, raw_yr, can_xz, can_yz, can_xr_sq, can_yr;
  for (int r = 0; r < reps; ++r) {
    RngStream draw_raw(73, static_cast<std::uint64_t>(r) + 1);
    const CanonicalData a = to_canonical(sample_raw(p, z, w, draw_raw), b);
    raw_xz.add(a.x_z(0));
    raw_yz.add(a.y_z(1));
    raw_xr_sq.add(a.x_r.squaredNorm());
    raw_yr.add(a.y_r(0));
    RngStream draw_can(74, static_cast<std::uint64_t>(r) + 1);
    const CanonicalData c = sample_canonical(theta, 2, 6, draw_can);
    can_xz.add(c.x_z(0));
    can_yz.add(c.y_z(1));
    can_xr_sq.add(c.x_r.squaredNorm());
    can_yr.add(c.y_r(0));
  }
  const auto close = [](const MeanVar& a, const MeanVar& b) {
    const double se = std::sqrt(a.se_of_mean() * a.se_of_mean() +
                                b.se_of_mean() * b.se_of_mean());
    return std::abs(a.mean - b.mean) <= 3.0 * se;
  };
  CHECK(close(raw_xz, can_xz));
  CHECK(close(raw_yz, can_yz));
  CHECK(close(raw_xr_sq, can_xr_sq));
  CHECK(close(raw_yr, can_yr));
}

TEST_CASE("basis non-uniqueness is harmless for norms and estimators") {
  RngStream rng(79, 0);
  const int n = 24, k = 1, ell = 3;
  const MatrixXd z = random_matrix(rng, n, ell);
  const MatrixXd w = random_matrix(rng, n, k);
  const OrthoBasis b = build_basis(z, w);
  const int s = b.s();

  // rotate within the z and r blocks: still a valid basis for (z, w)
  const GroupElement g = random_group(rng, ell, s, 0.0);
  OrthoBasis b2 = b;
  b2.qz = b.qz * g.g_z.transpose();
  b2.qr = b.qr * g.g_r.transpose();

  RawDataset d;
  d.z = z;
  d.w = w;
  d.x = random_vector(rng, n);
  d.y = random_vector(rng, n);
  const CanonicalData c1 = to_canonical(d, b);
  const CanonicalData c2 = to_canonical(d, b2);

  CHECK(std::abs(c1.x_z.norm() - c2.x_z.norm()) <= 1e-8);
  CHECK(std::abs(c1.x_r.norm() - c2.x_r.norm()) <= 1e-8);
  CHECK(std::abs(tsls_beta(c1) - tsls_beta(c2)) <= 1e-8);
  CHECK(std::abs(ols_beta(c1) - ols_beta(c2)) <= 1e-8);
  const ShrinkageSpec spec{Shrinkage::harmonic, 0.4};
  CHECK(std::abs(shrink_iv_beta(c1, spec) - shrink_iv_beta(c2, spec)) <= 1e-8);
}
