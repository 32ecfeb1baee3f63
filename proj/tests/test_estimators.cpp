#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfshrink/canonical.hpp"
#include "cfshrink/errors.hpp"
#include "cfshrink/estimators.hpp"
#include "cfshrink/invariance.hpp"
#include "helpers.hpp"

using namespace cfshrink;
using namespace testutil;

TEST_CASE("shrinkage_factor: displayed forms and edge values") {
  CHECK(shrinkage_factor({Shrinkage::none, 3.0}, 1.0, 5.0) == 1.0);
  CHECK(shrinkage_factor({Shrinkage::james_stein, 0.0}, 1.0, 5.0) == 1.0);
  CHECK(shrinkage_factor({Shrinkage::harmonic, 0.0}, 1.0, 5.0) == 1.0);
  CHECK(shrinkage_factor({Shrinkage::harmonic, 1.0}, 1.0, 1.0) == doctest::Approx(0.5));
  // the sign crossing that motivates the harmonic variant
  CHECK(shrinkage_factor({Shrinkage::james_stein, 1.0}, 1.0, 2.0) == doctest::Approx(-1.0));
  CHECK(shrinkage_factor({Shrinkage::james_stein_positive, 1.0}, 1.0, 2.0) == 0.0);
  CHECK_THROWS_AS(shrinkage_factor({Shrinkage::harmonic, 1.0}, 0.0, 1.0),
                  degenerate_first_stage);
  CHECK_THROWS_AS(shrinkage_factor({Shrinkage::harmonic, -0.5}, 1.0, 1.0), config_error);
}

TEST_CASE("shrinkage_factor: harmonic output stays in (0, 1]") {
  RngStream rng(83, 0);
  for (int i = 0; i < 2000; ++i) {
    const double sq_z = std::exp(6.0 * (rng.uniform01() - 0.5));
    const double sq_r = std::exp(6.0 * (rng.uniform01() - 0.5));
    const double p = std::exp(8.0 * (rng.uniform01() - 0.25));
    const double c = shrinkage_factor({Shrinkage::harmonic, p}, sq_z, sq_r);
    CHECK(c > 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("default_tuning: p = (ell-2)/s, refused below ell = 3") {
  CHECK(default_tuning(8, 20) == doctest::Approx(0.3));
  CHECK(default_tuning(3, 5) == doctest::Approx(0.2));
  CHECK_THROWS_AS(default_tuning(2, 5), config_error);
}

TEST_CASE("cf_beta: OLS first stage reproduces 2SLS") {
  RngStream rng(89, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const CanonicalData d = random_canonical_data(rng, 3, 4);
    CHECK(std::abs(cf_beta(d, d.x_z) - tsls_beta(d)) <= 1e-10);
  }
}

TEST_CASE("cf_beta matches the brute-force normal-equations oracle") {
  RngStream rng(97, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const CanonicalData d = random_canonical_data(rng, 3, 3);
    const VectorXd mu_hat = random_vector(rng, 3);
    VectorXd x = d.x_stacked();
    VectorXd ctrl = x;
    ctrl.head(3) -= mu_hat;
    const double expect = two_regressor_coef(d.y_stacked(), x, ctrl);
    CHECK(cf_beta(d, mu_hat) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("cf_beta: exact fit and rank failure") {
  RngStream rng(101, 0);
  CanonicalData d = random_canonical_data(rng, 2, 3);
  d.y_z = 7.0 * d.x_z;
  d.y_r = 7.0 * d.x_r;
  const VectorXd mu_hat = random_vector(rng, 2);
  CHECK(std::abs(cf_beta(d, mu_hat) - 7.0) <= 1e-10);
  CHECK_THROWS_AS(cf_beta(d, VectorXd::Zero(2)), estimator_undefined);
}

TEST_CASE("shrink_iv_beta: spec examples") {
  CanonicalData d;
  d.x_z = Eigen::Vector2d(1, 0);
  d.x_r = VectorXd::Ones(1) * 2.0;
  d.y_z = Eigen::Vector2d(3, 0);
  d.y_r = VectorXd::Ones(1) * 5.0;

  CHECK(shrink_iv_beta(d, {Shrinkage::none, 0.0}) == doctest::Approx(3.0));
  CHECK(tsls_beta(d) == doctest::Approx(3.0));

  // harmonic, p = 1: c = 1/(1+4) = 0.2; closed form equals the two-regressor fit
  const ShrinkageSpec harm{Shrinkage::harmonic, 1.0};
  CHECK(shrinkage_factor(harm, d.x_z.squaredNorm(), d.x_r.squaredNorm()) ==
        doctest::Approx(0.2));
  CHECK(shrink_iv_beta(d, harm) == doctest::Approx(cf_beta(d, 0.2 * d.x_z)).epsilon(1e-12));
}

TEST_CASE("shrink_iv_beta equals cf_beta(d, c x_z) on random data") {
  RngStream rng(103, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int ell = 2 + static_cast<int>(rng.uniform01() * 5);
    const int s = 1 + static_cast<int>(rng.uniform01() * 6);
    const CanonicalData d = random_canonical_data(rng, ell, s);
    const ShrinkageSpec spec{Shrinkage::harmonic, 2.0 * rng.uniform01()};
    const double c = shrinkage_factor(spec, d.x_z.squaredNorm(), d.x_r.squaredNorm());
    const double direct = cf_beta(d, c * d.x_z);
    CHECK(shrink_iv_beta(d, spec) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("shrink_iv_beta: divergence at c = 0, james_stein crossing kept raw") {
  CanonicalData d;
  d.x_z = VectorXd::Ones(1);
  d.x_r = Eigen::Vector2d(1.0, 1.0);
  d.y_z = VectorXd::Ones(1) * 2.0;
  d.y_r = Eigen::Vector2d(0.5, -0.5);
  // c = 1 - 0.5*2 = 0 exactly
  CHECK_THROWS_AS(shrink_iv_beta(d, {Shrinkage::james_stein, 0.5}), divergence_error);
  CHECK_THROWS_AS(shrink_iv_beta(d, {Shrinkage::james_stein_positive, 0.7}),
                  divergence_error);
  // negative c is defined (the estimator just behaves badly there)
  CHECK_NOTHROW(shrink_iv_beta(d, {Shrinkage::james_stein, 0.9}));
}

TEST_CASE("reduction identity: no shrinkage is exactly 2SLS") {
  RngStream rng(107, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int ell = 1 + static_cast<int>(rng.uniform01() * 16);
    const int s = 1 + static_cast<int>(rng.uniform01() * 32);
    const CanonicalData d = random_canonical_data(rng, ell, s);
    CHECK(std::abs(shrink_iv_beta(d, {Shrinkage::none, 0.0}) - tsls_beta(d)) <= 1e-10);
  }
}

TEST_CASE("tsls_beta: unit vector and exact-proportional cases") {
  CanonicalData d;
  d.x_z = Eigen::Vector4d(1, 0, 0, 0);
  d.y_z = Eigen::Vector4d(2.5, -3.0, 0.1, 9.0);
  d.x_r = VectorXd::Ones(1);
  d.y_r = VectorXd::Ones(1);
  CHECK(tsls_beta(d) == doctest::Approx(2.5));

  RngStream rng(109, 0);
  CanonicalData prop = random_canonical_data(rng, 3, 2);
  prop.y_z = -1.75 * prop.x_z;
  prop.y_r = -1.75 * prop.x_r;
  CHECK(tsls_beta(prop) == doctest::Approx(-1.75));

  d.x_z.setZero();
  CHECK_THROWS_AS(tsls_beta(d), degenerate_first_stage);
}

TEST_CASE("ols_beta: stacked ratio and degenerate input") {
  CanonicalData d;
  d.x_z = VectorXd::Ones(1);
  d.x_r = VectorXd::Ones(1);
  d.y_z = VectorXd::Zero(1);
  d.y_r = VectorXd::Ones(1) * 2.0;
  CHECK(ols_beta(d) == doctest::Approx(1.0));

  RngStream rng(113, 0);
  CanonicalData prop = random_canonical_data(rng, 2, 2);
  prop.y_z = 2.0 * prop.x_z;
  prop.y_r = 2.0 * prop.x_r;
  CHECK(ols_beta(prop) == doctest::Approx(2.0));

  d.x_z.setZero();
  d.x_r.setZero();
  CHECK_THROWS_AS(ols_beta(d), estimator_undefined);
}

TEST_CASE("canonical 2SLS and OLS equal their classical raw-data counterparts") {
  RngStream rng(127, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform01() * 60);
    const int k = static_cast<int>(rng.uniform01() * 4);
    const int ell = 1 + static_cast<int>(rng.uniform01() * 6);
    if (1 + k + ell > n - 1) continue;
    RawDataset d;
    d.z = random_matrix(rng, n, ell);
    d.w = random_matrix(rng, n, k);
    d.x = random_vector(rng, n);
    d.y = random_vector(rng, n);
    const OrthoBasis b = build_basis(d.z, d.w);
    const CanonicalData c = to_canonical(d, b);
    CHECK(std::abs(tsls_beta(c) - classical_tsls(d)) <= 1e-8);
    CHECK(std::abs(ols_beta(c) - classical_ols(d)) <= 1e-8);
  }
}

TEST_CASE("rotation invariance, translation and scale equivariance") {
  RngStream rng(131, 0);
  const ShrinkageSpec specs[] = {{Shrinkage::none, 0.0},
                                 {Shrinkage::harmonic, 0.7},
                                 {Shrinkage::james_stein, 0.15}};
  for (int trial = 0; trial < 100; ++trial) {
    const int ell = 2 + static_cast<int>(rng.uniform01() * 4);
    const int s = 2 + static_cast<int>(rng.uniform01() * 4);
    const CanonicalData d = random_canonical_data(rng, ell, s);

    GroupElement rot = random_group(rng, ell, s, 0.0);
    rot.g_beta = 0.0;
    const CanonicalData rotated = act_sample(rot, d);
    CHECK(std::abs(tsls_beta(rotated) - tsls_beta(d)) <= 1e-8);
    CHECK(std::abs(ols_beta(rotated) - ols_beta(d)) <= 1e-8);
    for (const auto& spec : specs)
      CHECK(std::abs(shrink_iv_beta(rotated, spec) - shrink_iv_beta(d, spec)) <= 1e-8);

    const double shift = rng.normal();
    CanonicalData shifted = d;
    shifted.y_z += shift * d.x_z;
    shifted.y_r += shift * d.x_r;
    CHECK(std::abs(tsls_beta(shifted) - tsls_beta(d) - shift) <= 1e-8);
    CHECK(std::abs(ols_beta(shifted) - ols_beta(d) - shift) <= 1e-8);
    for (const auto& spec : specs)
      CHECK(std::abs(shrink_iv_beta(shifted, spec) - shrink_iv_beta(d, spec) - shift) <=
            1e-8);

    const double t = 0.2 + 3.0 * rng.uniform01();
    CanonicalData scaled = d;
    scaled.y_z *= t;
    scaled.y_r *= t;
    CHECK(tsls_beta(scaled) == doctest::Approx(t * tsls_beta(d)).epsilon(1e-10));
    CHECK(ols_beta(scaled) == doctest::Approx(t * ols_beta(d)).epsilon(1e-10));
    for (const auto& spec : specs)
      CHECK(shrink_iv_beta(scaled, spec) ==
            doctest::Approx(t * shrink_iv_beta(d, spec)).epsilon(1e-10));
  }
}
