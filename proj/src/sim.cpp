#include "cfshrink/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "cfshrink/errors.hpp"
#include "cfshrink/oracle.hpp"

namespace cfshrink {

std::string sim_mode_name(SimMode m) {
  return m == SimMode::full ? "full" : "rb";
}

SimMode sim_mode_from_name(const std::string& name) {
  if (name == "full") return SimMode::full;
  if (name == "rb" || name == "rao_blackwell") return SimMode::rao_blackwell;
  throw config_error("unknown mode: " + name + " (expected full|rb)");
}

std::string dominance_name(Dominance d) {
  switch (d) {
    case Dominance::self: return "self";
    case Dominance::dominates: return "dominates";
    case Dominance::tie: return "tie";
    case Dominance::dominated: return "dominated";
  }
  return "?";
}

VectorXd SimConfig::resolved_mu() const {
  if (mu.size() > 0) return mu;
  VectorXd m = VectorXd::Zero(ell);
  m(0) = std::sqrt(2.0 * kappa) * tau;
  return m;
}

double SimConfig::resolved_kappa() const {
  if (mu.size() == 0) return kappa;
  return mu.squaredNorm() / (2.0 * tau * tau);
}

void SimConfig::validate() const {
  if (reps < 1) throw config_error("reps must be >= 1");
  if (ell < 1 || s < 1) throw config_error("need ell >= 1 and s >= 1");
  if (mu.size() > 0 && mu.size() != ell)
    throw config_error("explicit mu length does not match ell");
  if (mu.size() == 0 && kappa < 0.0) throw config_error("kappa must be >= 0");
  for (const auto& spec : specs)
    if (spec.p < 0.0) throw config_error("tuning constant p must be >= 0");
  CanonicalParams theta{beta, resolved_mu(), rho, sigma, tau};
  theta.validate();
}

namespace {

constexpr long kChunkReps = 4096;

struct Accum {
  long n = 0;
  double sum = 0.0, sumsq = 0.0;
  // paired with the 2SLS row over replications where both are defined
  long pn = 0;
  double psum_a = 0.0, psum_b = 0.0, psum_ab = 0.0;
  double psumsq_a = 0.0, psumsq_b = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sumsq += v * v;
  }
  void add_pair(double a, double b) {
    ++pn;
    psum_a += a;
    psum_b += b;
    psum_ab += a * b;
    psumsq_a += a * a;
    psumsq_b += b * b;
  }
  void merge(const Accum& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
    pn += o.pn;
    psum_a += o.psum_a;
    psum_b += o.psum_b;
    psum_ab += o.psum_ab;
    psumsq_a += o.psumsq_a;
    psumsq_b += o.psumsq_b;
  }
};

// Evaluates one replication into values[row]; nullopt marks a divergent row.
void evaluate_rep(const SimConfig& cfg, const CanonicalParams& theta,
                  RngStream& rng, std::vector<std::optional<double>>& values) {
  const int n_rows = 2 + static_cast<int>(cfg.specs.size());
  values.assign(n_rows, std::nullopt);

  if (cfg.mode == SimMode::full) {
    const CanonicalData d = sample_canonical(theta, cfg.ell, cfg.s, rng);
    try {
      values[0] = ols_beta(d) - cfg.beta;
    } catch (const numeric_error&) {}
    try {
      values[1] = tsls_beta(d) - cfg.beta;
    } catch (const numeric_error&) {}
    for (std::size_t i = 0; i < cfg.specs.size(); ++i) {
      try {
        values[2 + i] = shrink_iv_beta(d, cfg.specs[i]) - cfg.beta;
      } catch (const numeric_error&) {}
    }
    return;
  }

  // rao_blackwell: x drawn exactly as in sample_canonical, y never drawn
  VectorXd x_z(cfg.ell), x_r(cfg.s);
  for (int i = 0; i < cfg.ell; ++i) x_z(i) = theta.mu(i) + theta.tau * rng.normal();
  for (int j = 0; j < cfg.s; ++j) x_r(j) = theta.tau * rng.normal();

  const double sq_z = x_z.squaredNorm();
  const double sq_r = x_r.squaredNorm();
  const double scale = cfg.rho * cfg.sigma / cfg.tau;
  const double mdot = x_z.dot(theta.mu);

  values[0] = (1.0 - mdot / (sq_z + sq_r)) * scale;
  if (sq_z > 0.0) {
    const double ratio = mdot / sq_z;
    values[1] = (1.0 - ratio) * scale;
    const double tau2 = cfg.tau * cfg.tau;
    for (std::size_t i = 0; i < cfg.specs.size(); ++i) {
      const auto& spec = cfg.specs[i];
      if (spec.variant == Shrinkage::none || spec.p == 0.0) {
        values[2 + i] = values[1];
      } else if (spec.variant == Shrinkage::harmonic) {
        const double lambda = spec.p * cfg.s;
        values[2 + i] = (1.0 - ratio - lambda * tau2 * mdot / (sq_z * sq_z)) * scale;
      } else {
        const double c = shrinkage_factor(spec, sq_z, sq_r);
        if (c != 0.0) values[2 + i] = (1.0 - ratio / c) * scale;
      }
    }
  }
}

SimResult run_engine(const SimConfig& cfg, int workers) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const CanonicalParams theta{cfg.beta, cfg.resolved_mu(), cfg.rho, cfg.sigma,
                              cfg.tau};
  const int n_rows = 2 + static_cast<int>(cfg.specs.size());
  const long n_chunks = (cfg.reps + kChunkReps - 1) / kChunkReps;

  std::vector<std::vector<Accum>> chunk_acc(
      static_cast<std::size_t>(n_chunks),
      std::vector<Accum>(static_cast<std::size_t>(n_rows)));

  const auto run_chunk = [&](long chunk) {
    auto& acc = chunk_acc[static_cast<std::size_t>(chunk)];
    const long lo = chunk * kChunkReps;
    const long hi = std::min(cfg.reps, lo + kChunkReps);
    std::vector<std::optional<double>> values;
    for (long rep = lo; rep < hi; ++rep) {
      RngStream rng(cfg.seed, static_cast<std::uint64_t>(rep));
      evaluate_rep(cfg, theta, rng, values);
      for (int row = 0; row < n_rows; ++row) {
        if (values[row]) acc[row].add(*values[row]);
        if (row != 1 && values[row] && values[1])
          acc[row].add_pair(*values[row], *values[1]);
      }
    }
  };

  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, workers);
  if (workers == 1 || n_chunks == 1) {
    for (long chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    const int n_threads = static_cast<int>(std::min<long>(workers, n_chunks));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (long chunk = next.fetch_add(1); chunk < n_chunks;
             chunk = next.fetch_add(1))
          run_chunk(chunk);
      });
    for (auto& th : pool) th.join();
  }

  // canonical merge order: chunk index
  std::vector<Accum> acc(static_cast<std::size_t>(n_rows));
  for (long chunk = 0; chunk < n_chunks; ++chunk)
    for (int row = 0; row < n_rows; ++row)
      acc[row].merge(chunk_acc[static_cast<std::size_t>(chunk)][row]);

  SimResult result;
  result.reps = cfg.reps;
  result.seed = cfg.seed;
  result.mode = cfg.mode;
  result.rng_name = RngStream::kGeneratorName;

  const double kappa = cfg.resolved_kappa();
  const bool oracle_ok = cfg.ell >= 3 && kappa <= 1e6;
  const auto oracle_for = [&](double lambda) -> std::optional<double> {
    if (!oracle_ok) return std::nullopt;
    return bias_B(cfg.ell, kappa, lambda) * cfg.rho * cfg.sigma / cfg.tau;
  };

  for (int row = 0; row < n_rows; ++row) {
    EstimatorRow r;
    if (row == 0) {
      r.name = "ols";
      r.lambda = std::numeric_limits<double>::quiet_NaN();
    } else if (row == 1) {
      r.name = "2sls";
      r.lambda = 0.0;
      r.oracle_bias = oracle_for(0.0);
    } else {
      const auto& spec = cfg.specs[static_cast<std::size_t>(row - 2)];
      r.name = shrinkage_name(spec.variant);
      r.lambda = (spec.variant == Shrinkage::none) ? 0.0 : spec.p * cfg.s;
      if (spec.variant == Shrinkage::none)
        r.oracle_bias = oracle_for(0.0);
      else if (spec.variant == Shrinkage::harmonic)
        r.oracle_bias = oracle_for(spec.p * cfg.s);
    }

    const Accum& a = acc[static_cast<std::size_t>(row)];
    if (a.n == 0)
      throw numeric_error("all replications divergent for estimator " + r.name);
    r.n_divergent = cfg.reps - a.n;
    r.emp_bias = a.sum / static_cast<double>(a.n);
    if (a.n >= 2) {
      const double var =
          std::max(0.0, (a.sumsq - a.sum * a.sum / static_cast<double>(a.n)) /
                            static_cast<double>(a.n - 1));
      r.mc_se = std::sqrt(var / static_cast<double>(a.n));
    }

    if (row == 1) {
      r.verdict = Dominance::self;
    } else if (a.pn >= 2) {
      const double m = static_cast<double>(a.pn);
      const double mean_a = a.psum_a / m;
      const double mean_b = a.psum_b / m;
      const double var_a = std::max(0.0, (a.psumsq_a - m * mean_a * mean_a) / (m - 1.0));
      const double var_b = std::max(0.0, (a.psumsq_b - m * mean_b * mean_b) / (m - 1.0));
      const double cov = (a.psum_ab - m * mean_a * mean_b) / (m - 1.0);
      const double sgn = ((mean_a < 0.0) ? -1.0 : 1.0) * ((mean_b < 0.0) ? -1.0 : 1.0);
      const double var_diff = std::max(0.0, var_a + var_b - 2.0 * sgn * cov);
      r.se_diff_vs_tsls = std::sqrt(var_diff / m);
      const double abs_a = std::abs(mean_a);
      const double abs_b = std::abs(mean_b);
      if (abs_a + 3.0 * r.se_diff_vs_tsls < abs_b)
        r.verdict = Dominance::dominates;
      else if (abs_b + 3.0 * r.se_diff_vs_tsls < abs_a)
        r.verdict = Dominance::dominated;
      else
        r.verdict = Dominance::tie;
    } else {
      r.verdict = Dominance::tie;
      r.se_diff_vs_tsls = std::numeric_limits<double>::quiet_NaN();
    }
    result.rows.push_back(std::move(r));
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace

SimResult compare_estimators(const SimConfig& cfg, int workers) {
  return run_engine(cfg, workers);
}

SimResult run_bias_mc(const SimConfig& cfg, int workers) {
  return run_engine(cfg, workers);
}

}  // namespace cfshrink
