#include "cfshrink/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "cfshrink/errors.hpp"

namespace cfshrink {

namespace {
constexpr double kRankThreshold = 1e-10;
}

std::string shrinkage_name(Shrinkage v) {
  switch (v) {
    case Shrinkage::none: return "none";
    case Shrinkage::james_stein: return "james_stein";
    case Shrinkage::james_stein_positive: return "james_stein_positive";
    case Shrinkage::harmonic: return "harmonic";
  }
  return "?";
}

Shrinkage shrinkage_from_name(const std::string& name) {
  if (name == "none" || name == "2sls") return Shrinkage::none;
  if (name == "james_stein") return Shrinkage::james_stein;
  if (name == "james_stein_positive") return Shrinkage::james_stein_positive;
  if (name == "harmonic") return Shrinkage::harmonic;
  throw config_error("unknown shrinkage variant: " + name);
}

double default_tuning(int ell, int s) {
  if (s < 1) throw config_error("need s >= 1");
  if (ell < 3)
    throw config_error("no safe default tuning for ell < 3; pass p explicitly");
  return static_cast<double>(ell - 2) / static_cast<double>(s);
}

double shrinkage_factor(const ShrinkageSpec& spec, double sq_z, double sq_r) {
  if (!(sq_z > 0.0))
    throw degenerate_first_stage("||x_z||^2 = 0: no instrument signal in sample");
  if (sq_r < 0.0) throw numeric_error("||x_r||^2 must be nonnegative");
  if (spec.p < 0.0) throw config_error("tuning constant p must be >= 0");
  if (spec.variant == Shrinkage::none || spec.p == 0.0) return 1.0;
  const double ratio = sq_r / sq_z;
  switch (spec.variant) {
    case Shrinkage::james_stein:
      return 1.0 - spec.p * ratio;
    case Shrinkage::james_stein_positive:
      return std::max(0.0, 1.0 - spec.p * ratio);
    case Shrinkage::harmonic:
      return sq_z / (sq_z + spec.p * sq_r);
    case Shrinkage::none:
      break;
  }
  return 1.0;
}

double cf_beta(const CanonicalData& d, const VectorXd& mu_hat) {
  d.validate();
  if (mu_hat.size() != d.ell())
    throw config_error("mu_hat length does not match ell");
  const int m = d.ell() + d.s();
  MatrixXd design(m, 2);
  design.col(0) = d.x_stacked();
  design.col(1) = design.col(0);
  design.col(1).head(d.ell()) -= mu_hat;

  Eigen::JacobiSVD<MatrixXd> svd(design);
  const double smax = svd.singularValues()(0);
  if (!(smax > 0.0) || svd.singularValues()(1) <= kRankThreshold * smax)
    throw estimator_undefined(
        "two-regressor design is rank deficient (mu_hat = 0 or x* = 0?)");
  Eigen::Vector2d coef = design.householderQr().solve(d.y_stacked());
  return coef(0);
}

double shrink_iv_beta(const CanonicalData& d, const ShrinkageSpec& spec) {
  d.validate();
  const double sq_z = d.x_z.squaredNorm();
  const double sq_r = d.x_r.squaredNorm();
  const double c = shrinkage_factor(spec, sq_z, sq_r);
  if (c == 0.0)
    throw divergence_error("shrinkage factor c(x*) = 0: estimator diverges");

  const double xz_yz = d.x_z.dot(d.y_z);
  const double xr_yr = d.x_r.dot(d.y_r);
  double num, den;
  if (c == 1.0) {
    // b = (0, x_r): the projection drops the x_r block exactly (2SLS)
    num = xz_yz;
    den = sq_z;
  } else {
    const double omc = 1.0 - c;
    const double bb = omc * omc * sq_z + sq_r;
    const double bx = omc * sq_z + sq_r;
    const double by = omc * xz_yz + xr_yr;
    const double xx = sq_z + sq_r;
    const double xy = xz_yz + xr_yr;
    if (bb == 0.0) {
      num = xy;
      den = xx;
    } else {
      num = xy - bx * by / bb;
      den = xx - bx * bx / bb;
    }
    if (!(den > kRankThreshold * kRankThreshold * xx))
      throw estimator_undefined("x* lies in the span of the control column");
  }
  return num / den;
}

double tsls_beta(const CanonicalData& d) {
  d.validate();
  const double sq_z = d.x_z.squaredNorm();
  if (!(sq_z > 0.0))
    throw degenerate_first_stage("||x_z|| = 0: no instrument signal in sample");
  return d.x_z.dot(d.y_z) / sq_z;
}

double ols_beta(const CanonicalData& d) {
  d.validate();
  const double sq = d.x_z.squaredNorm() + d.x_r.squaredNorm();
  if (!(sq > 0.0)) throw estimator_undefined("x* = 0");
  return (d.x_z.dot(d.y_z) + d.x_r.dot(d.y_r)) / sq;
}

}  // namespace cfshrink
