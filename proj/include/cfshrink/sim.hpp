#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfshrink/estimators.hpp"
#include "cfshrink/model.hpp"

namespace cfshrink {

enum class SimMode { full, rao_blackwell };

std::string sim_mode_name(SimMode m);
SimMode sim_mode_from_name(const std::string& name);

// One Monte Carlo cell. When mu is empty it is materialized from kappa as
// (sqrt(2 kappa) tau, 0, ..., 0); rotation invariance makes the direction
// irrelevant, and the invariance suite verifies that independently.
struct SimConfig {
  int ell = 4;
  int s = 1;
  double kappa = 0.0;
  VectorXd mu;  // optional explicit mean; empty -> derived from kappa
  double beta = 0.0;
  double rho = 0.0;
  double sigma = 1.0;
  double tau = 1.0;
  std::vector<ShrinkageSpec> specs;  // compared in addition to OLS and 2SLS
  long reps = 1;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::full;

  VectorXd resolved_mu() const;
  double resolved_kappa() const;
  void validate() const;
};

enum class Dominance { self, dominates, tie, dominated };

std::string dominance_name(Dominance d);

struct EstimatorRow {
  std::string name;
  double lambda = 0.0;  // p*s for shrinkage rows, 0 for 2SLS, NaN for OLS
  double emp_bias = 0.0;
  double mc_se = 0.0;
  long n_divergent = 0;
  std::optional<double> oracle_bias;
  // Paired-difference SE against the 2SLS row (common random numbers,
  // delta method on |bias|); drives the verdict.
  double se_diff_vs_tsls = 0.0;
  Dominance verdict = Dominance::self;
};

struct SimResult {
  std::vector<EstimatorRow> rows;  // ols, 2sls, then one per spec
  long reps = 0;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::full;
  double wall_seconds = 0.0;
  std::string rng_name;
};

// Estimates E[beta_hat] - beta per estimator with common random numbers
// across rows (replication i owns sub-stream (seed, i)).
//
// mode full: draw (X*, Y*) and evaluate each estimator.
// mode rao_blackwell: draw X* only. The 2SLS and harmonic rows average the
// exact (X_r, Y)-collapse 1 - M'mu/||M||^2 - lambda tau^2 M'mu/||M||^4
// (lambda = p s, M = X*_z) scaled by rho sigma / tau; OLS and the
// james_stein rows average their exact conditional bias given X* (Y-collapse
// only, their factors do not integrate out over X_r).
//
// Divergent replications (c = 0, rank failures) are excluded from means and
// counted in n_divergent. workers <= 0 picks machine parallelism; results
// are bitwise independent of the worker count (fixed chunk partition merged
// in chunk order).
SimResult compare_estimators(const SimConfig& cfg, int workers = 1);

// Same engine and output as compare_estimators.
SimResult run_bias_mc(const SimConfig& cfg, int workers = 1);

}  // namespace cfshrink
