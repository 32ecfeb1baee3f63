#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfshrink/model.hpp"
#include "cfshrink/rng.hpp"

namespace cfshrink {

// Element of G = R x O(ell) x O(s): a target-parameter translation plus a
// rotation of each coordinate block.
struct GroupElement {
  double g_beta = 0.0;
  MatrixXd g_z;  // ell x ell orthogonal
  MatrixXd g_r;  // s x s orthogonal

  static GroupElement identity(int ell, int s);
  GroupElement compose(const GroupElement& first) const;  // this after first
  void validate(double tol = 1e-10) const;
};

// Sample-space action: x -> Q_g x, y -> Q_g (y + g_beta x), Q_g = diag(g_z, g_r).
CanonicalData act_sample(const GroupElement& g, const CanonicalData& d);

// Parameter-space action: (beta, mu, rho, sigma, tau) -> (beta + g_beta, g_z mu, ...).
CanonicalParams act_param(const GroupElement& g, const CanonicalParams& theta);

// Action-space action: a -> a + g_beta.
double act_action(const GroupElement& g, double a);

// Haar-distributed (g_z, g_r) via QR of an iid Normal matrix with the signs
// of the triangular factor's diagonal fixed positive; g_beta ~ N(0, beta_scale^2).
GroupElement random_group(RngStream& rng, int ell, int s, double beta_scale);

enum class Verdict { pass, fail, inconclusive };

struct InvarianceCheck {
  Verdict verdict = Verdict::inconclusive;
  double residual = 0.0;  // |rule(g.d) - (rule(d) + g_beta)|, NaN if inconclusive
  std::string note;
};

using DecisionRule = std::function<double(const CanonicalData&)>;

// Inconclusive when the rule is undefined (throws) at d or act_sample(g, d).
InvarianceCheck check_rule_invariance(const DecisionRule& rule,
                                      const GroupElement& g,
                                      const CanonicalData& d, double tol);

// Aggregate over randomized trials; one row per checked rule plus the
// log-density (model invariance) check. Residuals are reported so tolerance
// drift shows up in CI output, not just a boolean.
struct SuiteCheck {
  std::string name;
  double max_residual = 0.0;
  long n_pass = 0;
  long n_fail = 0;
  long n_inconclusive = 0;
};

struct InvarianceSuiteResult {
  std::vector<SuiteCheck> checks;
  long trials = 0;
  double tol = 0.0;
  bool passed() const;
};

// shear_only_z is a test hook: it corrupts the sample action by applying the
// g_beta shear to the z-block of y only, which a working suite must detect.
InvarianceSuiteResult run_invariance_suite(int ell, int s, long trials,
                                           std::uint64_t seed,
                                           double tol = 1e-8,
                                           bool shear_only_z = false);

}  // namespace cfshrink
