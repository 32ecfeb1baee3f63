#include "cfshrink/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cfshrink/errors.hpp"

namespace cfshrink {

namespace {

constexpr double kTailTol = 1e-13;
constexpr double kKappaRefusal = 1e6;

// P(K >= x) <= exp(x - kappa - x log(x/kappa)) for x > kappa (Chernoff).
double poisson_tail_bound(double kappa, double x) {
  return std::exp(x - kappa - x * std::log(x / kappa));
}

// E[f(K)] for K ~ Poisson(kappa), f bounded by 1 beyond the truncation
// point, so the neglected mass bounds the truncation error. Probabilities
// are formed in log space and exponentiated per term.
template <class F>
double poisson_expectation(double kappa, F f) {
  if (kappa == 0.0) return f(0L);
  if (kappa > kKappaRefusal)
    throw numeric_error(
        "kappa > 1e6: refusing the Poisson series at this scale; "
        "a Normal approximation would be needed and is not provided");
  const long kmax =
      static_cast<long>(std::ceil(kappa + 12.0 * std::sqrt(kappa))) + 60;
  const double tail = poisson_tail_bound(kappa, static_cast<double>(kmax + 1));
  if (!(tail < kTailTol))
    throw numeric_error("poisson series truncation could not be certified");
  const double log_kappa = std::log(kappa);
  double total = 0.0;
  for (long k = 0; k <= kmax; ++k) {
    const double log_pmf =
        -kappa + static_cast<double>(k) * log_kappa - std::lgamma(static_cast<double>(k) + 1.0);
    total += std::exp(log_pmf) * f(k);
  }
  return total;
}

}  // namespace

double conditional_bias(const CanonicalParams& theta, const VectorXd& x_z,
                        double c) {
  theta.validate();
  if (x_z.size() != theta.ell())
    throw config_error("x_z length does not match mu");
  if (c == 0.0) throw divergence_error("conditional bias requires c(x*) != 0");
  const double sq_z = x_z.squaredNorm();
  if (!(sq_z > 0.0))
    throw degenerate_first_stage("||x_z|| = 0: conditional bias undefined");
  return (1.0 - (x_z.dot(theta.mu) / sq_z) / c) * theta.rho * theta.sigma / theta.tau;
}

double conditional_mean(const CanonicalParams& theta, const VectorXd& x_z,
                        const VectorXd& x_r, const VectorXd& weight) {
  theta.validate();
  if (x_z.size() != theta.ell())
    throw config_error("x_z length does not match mu");
  if (weight.size() != x_z.size() + x_r.size())
    throw config_error("weight length does not match ell + s");
  const double cf = theta.rho * theta.sigma / theta.tau;
  double total = 0.0;
  for (int i = 0; i < x_z.size(); ++i)
    total += weight(i) * (x_z(i) * theta.beta + (x_z(i) - theta.mu(i)) * cf);
  for (int j = 0; j < x_r.size(); ++j)
    total += weight(x_z.size() + j) * (x_r(j) * theta.beta + x_r(j) * cf);
  return total;
}

std::pair<double, double> poisson_PQ(int ell, double kappa) {
  if (ell < 3) throw numeric_error("poisson_PQ needs ell >= 3");
  if (kappa < 0.0) throw numeric_error("kappa must be >= 0");
  if (kappa == 0.0) return {1.0, 0.0};
  const double a2 = static_cast<double>(ell - 2);
  const double P = poisson_expectation(
      kappa, [a2](long k) { return a2 / (a2 + 2.0 * static_cast<double>(k)); });
  const double Q = poisson_expectation(kappa, [a2, kappa](long k) {
    return 2.0 * kappa / (a2 + 2.0 * static_cast<double>(k));
  });
  return {P, Q};
}

double bias_B(int ell, double kappa, double lambda) {
  if (lambda < 0.0) throw numeric_error("lambda must be >= 0");
  const auto [P, Q] = poisson_PQ(ell, kappa);
  return P - 0.5 * lambda * (P + Q - 1.0);
}

double lambda_star(int ell, double kappa) {
  const auto [P, Q] = poisson_PQ(ell, kappa);
  if (kappa == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * P / (P + Q - 1.0);
}

double poisson_inverse_moment(double a, double nu) {
  if (a < 1.0) throw numeric_error("poisson_inverse_moment needs a >= 1");
  if (nu < 0.0) throw numeric_error("nu must be >= 0");
  return poisson_expectation(
      nu, [a](long k) { return 1.0 / (a + static_cast<double>(k)); });
}

double poisson_inverse_moment_bound(double a, double nu) {
  const double den = a + nu - 1.0;
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / den;
}

BiasReport bias_report(int ell, double kappa, double lambda, double rho,
                       double sigma, double tau) {
  BiasReport r;
  r.ell = ell;
  r.kappa = kappa;
  r.lambda = lambda;
  const auto [P, Q] = poisson_PQ(ell, kappa);
  r.P = P;
  r.Q = Q;
  r.B = P - 0.5 * lambda * (P + Q - 1.0);
  r.lambda_star = (kappa == 0.0) ? std::numeric_limits<double>::infinity()
                                 : 2.0 * P / (P + Q - 1.0);
  r.bias_unscaled = r.B * rho * sigma / tau;
  return r;
}

}  // namespace cfshrink
