#include "cfshrink/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cfshrink/errors.hpp"

namespace cfshrink {

namespace {

void check_noise_block(double rho, double sigma, double tau) {
  if (!(rho > -1.0 && rho < 1.0))
    throw config_error("rho must lie strictly in (-1, 1), got " + std::to_string(rho));
  if (!(sigma > 0.0)) throw config_error("sigma must be positive");
  if (!(tau > 0.0)) throw config_error("tau must be positive");
}

}  // namespace

void StructuralParams::validate() const {
  check_noise_block(rho, sigma, tau);
  if (pi.size() < 1) throw config_error("pi must have length ell >= 1");
  if (gamma.size() != gamma_x.size())
    throw config_error("gamma and gamma_x must have equal length k");
}

void CanonicalParams::validate() const {
  check_noise_block(rho, sigma, tau);
  if (mu.size() < 1) throw config_error("mu must have length ell >= 1");
}

VectorXd CanonicalData::x_stacked() const {
  VectorXd x(x_z.size() + x_r.size());
  x << x_z, x_r;
  return x;
}

VectorXd CanonicalData::y_stacked() const {
  VectorXd y(y_z.size() + y_r.size());
  y << y_z, y_r;
  return y;
}

void CanonicalData::validate() const {
  if (x_z.size() < 1 || x_r.size() < 1)
    throw config_error("canonical data needs ell >= 1 and s >= 1");
  if (x_z.size() != y_z.size() || x_r.size() != y_r.size())
    throw config_error("x and y block lengths disagree");
}

ReducedFormParams reduced_form(const StructuralParams& p) {
  p.validate();
  ReducedFormParams r;
  r.pi_y = p.pi * p.beta;
  r.gamma_y = p.gamma + p.gamma_x * p.beta;
  const double s = p.sigma, t = p.tau, rho = p.rho, b = p.beta;
  r.Sigma << s * s + 2.0 * rho * b * s * t + b * b * t * t, rho * s * t + b * t * t,
      rho * s * t + b * t * t, t * t;
  return r;
}

RawDataset sample_raw(const StructuralParams& p, const MatrixXd& z,
                      const MatrixXd& w, RngStream& rng) {
  p.validate();
  const int n = static_cast<int>(z.rows());
  const int k = static_cast<int>(w.cols());
  const int ell = static_cast<int>(z.cols());
  if (k > 0 && w.rows() != n) throw config_error("z and w row counts disagree");
  if (k != p.k()) throw config_error("w column count does not match gamma length");
  if (ell != p.ell()) throw config_error("z column count does not match pi length");
  if (1 + k + ell > n - 1)
    throw config_error("n too small: need 1 + k + ell <= n - 1");

  MatrixXd design(n, 1 + k + ell);
  design.col(0).setOnes();
  if (k > 0) design.middleCols(1, k) = w;
  design.rightCols(ell) = z;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 1 + k + ell)
    throw config_error("(1, w, z) is rank deficient");

  const double cross = std::sqrt(1.0 - p.rho * p.rho);
  RawDataset d;
  d.z = z;
  d.w = w;
  d.x.resize(n);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double e1 = rng.normal();
    const double e2 = rng.normal();
    const double u = p.sigma * e1;
    const double v = p.tau * (p.rho * e1 + cross * e2);
    double xi = p.alpha_x + z.row(i).dot(p.pi) + v;
    if (k > 0) xi += w.row(i).dot(p.gamma_x);
    double yi = p.alpha + xi * p.beta + u;
    if (k > 0) yi += w.row(i).dot(p.gamma);
    d.x(i) = xi;
    d.y(i) = yi;
  }
  return d;
}

CanonicalData sample_canonical(const CanonicalParams& theta, int ell, int s,
                               RngStream& rng) {
  theta.validate();
  if (ell < 1 || s < 1) throw config_error("need ell >= 1 and s >= 1");
  if (theta.ell() != ell) throw config_error("mu length does not match ell");

  CanonicalData d;
  d.x_z.resize(ell);
  d.x_r.resize(s);
  d.y_z.resize(ell);
  d.y_r.resize(s);
  for (int i = 0; i < ell; ++i) d.x_z(i) = theta.mu(i) + theta.tau * rng.normal();
  for (int j = 0; j < s; ++j) d.x_r(j) = theta.tau * rng.normal();

  const double cf = theta.rho * theta.sigma / theta.tau;
  const double ysd = std::sqrt(1.0 - theta.rho * theta.rho) * theta.sigma;
  for (int i = 0; i < ell; ++i)
    d.y_z(i) = d.x_z(i) * theta.beta + (d.x_z(i) - theta.mu(i)) * cf + ysd * rng.normal();
  for (int j = 0; j < s; ++j)
    d.y_r(j) = d.x_r(j) * theta.beta + d.x_r(j) * cf + ysd * rng.normal();
  return d;
}

double log_density(const CanonicalParams& theta, const CanonicalData& d) {
  theta.validate();
  d.validate();
  if (theta.ell() != d.ell())
    throw config_error("mu length does not match data ell");

  const int m = d.ell() + d.s();
  const double vx = theta.tau * theta.tau;
  const double vy = (1.0 - theta.rho * theta.rho) * theta.sigma * theta.sigma;
  const double cf = theta.rho * theta.sigma / theta.tau;
  constexpr double log2pi = 1.8378770664093454836;  // log(2*pi)

  double ssq_x = 0.0, ssq_y = 0.0;
  for (int i = 0; i < d.ell(); ++i) {
    const double rx = d.x_z(i) - theta.mu(i);
    ssq_x += rx * rx;
    const double ry = d.y_z(i) - d.x_z(i) * theta.beta - rx * cf;
    ssq_y += ry * ry;
  }
  for (int j = 0; j < d.s(); ++j) {
    const double rx = d.x_r(j);
    ssq_x += rx * rx;
    const double ry = d.y_r(j) - d.x_r(j) * theta.beta - rx * cf;
    ssq_y += ry * ry;
  }
  return -0.5 * m * (log2pi + std::log(vx)) - ssq_x / (2.0 * vx)
         - 0.5 * m * (log2pi + std::log(vy)) - ssq_y / (2.0 * vy);
}

}  // namespace cfshrink
