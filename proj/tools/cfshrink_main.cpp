// cfshrink: simulate | oracle | invariance | sample
//
// Exit codes: 0 success, 2 configuration error, 3 numerical/domain error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfshrink/canonical.hpp"
#include "cfshrink/errors.hpp"
#include "cfshrink/grid.hpp"
#include "cfshrink/invariance.hpp"
#include "cfshrink/model.hpp"
#include "cfshrink/oracle.hpp"
#include "cfshrink/sim.hpp"

namespace {

using namespace cfshrink;

struct SimulateOpts {
  std::string config, out, ell, s, kappa, rho, lambda, p, estimators;
  std::string beta, sigma, tau, reps, seed, mode, workers;
};

int run_simulate(const SimulateOpts& o) {
  std::map<std::string, std::string> kv;
  if (!o.config.empty()) kv = parse_config_file(o.config);
  const auto override_kv = [&kv](const std::string& key, const std::string& v) {
    if (!v.empty()) kv[key] = v;
  };
  override_kv("out", o.out);
  override_kv("ell", o.ell);
  override_kv("s", o.s);
  override_kv("kappa", o.kappa);
  override_kv("rho", o.rho);
  override_kv("lambda", o.lambda);
  override_kv("p", o.p);
  override_kv("estimators", o.estimators);
  override_kv("beta", o.beta);
  override_kv("sigma", o.sigma);
  override_kv("tau", o.tau);
  override_kv("reps", o.reps);
  override_kv("seed", o.seed);
  override_kv("mode", o.mode);
  override_kv("workers", o.workers);

  const ExperimentGrid grid = grid_from_kv(kv);
  grid.validate();
  if (grid.out.empty()) throw config_error("missing output path (--out)");

  const auto runs = run_grid(grid);

  std::ofstream out(grid.out, std::ios::binary);
  if (!out) throw config_error("cannot write output file: " + grid.out);
  write_csv(runs, out);
  out.close();
  if (!out) throw config_error("failed writing output file: " + grid.out);

  write_summary(runs, std::cout);
  double wall = 0.0;
  for (const auto& r : runs) wall += r.result.wall_seconds;
  std::cerr << "wrote " << grid.out << " (" << runs.size() << " cells, "
            << wall << " s, rng: " << RngStream::kGeneratorName << ")\n";
  return 0;
}

int run_oracle(int ell, double kappa, const std::string& lambda_list) {
  std::vector<double> lambdas;
  if (!lambda_list.empty()) {
    std::stringstream ss(lambda_list);
    std::string item;
    while (std::getline(ss, item, ',')) lambdas.push_back(std::stod(item));
  }
  const auto [P, Q] = poisson_PQ(ell, kappa);
  const double lstar = lambda_star(ell, kappa);
  std::cout << "ell = " << ell << "\nkappa = " << format_g17(kappa)
            << "\nP = " << format_g17(P) << "\nQ = " << format_g17(Q)
            << "\nlambda_star = " << format_g17(lstar) << '\n';
  for (double lambda : lambdas)
    std::cout << "B(" << format_g17(lambda)
              << ") = " << format_g17(bias_B(ell, kappa, lambda)) << '\n';
  return 0;
}

int run_invariance(int ell, int s, long trials, std::uint64_t seed,
                   bool shear_only_z) {
  const auto result = run_invariance_suite(ell, s, trials, seed, 1e-8, shear_only_z);
  for (const auto& c : result.checks)
    std::cout << "check " << c.name << ": max_residual=" << format_g17(c.max_residual)
              << " pass=" << c.n_pass << " fail=" << c.n_fail
              << " inconclusive=" << c.n_inconclusive << '\n';
  if (!result.passed()) {
    std::cerr << "invariance suite FAILED (tol " << format_g17(result.tol) << ")\n";
    return 3;
  }
  std::cout << "invariance suite passed (" << result.trials << " trials, tol "
            << format_g17(result.tol) << ")\n";
  return 0;
}

struct SampleOpts {
  std::string kind = "canonical";
  std::string out;
  int ell = 4, s = 4, n = 50, k = 2;
  double kappa = 1.0, beta = 0.0, rho = 0.5, sigma = 1.0, tau = 1.0;
  double alpha = 0.0, alpha_x = 0.0;
  std::string pi;  // comma list, default: all ones
  std::uint64_t seed = 1;
};

int run_sample(const SampleOpts& o) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) throw config_error("cannot write output file: " + o.out);
    os = &file;
  }

  if (o.kind == "canonical") {
    SimConfig cfg;  // reuse the kappa -> mu materialization
    cfg.ell = o.ell;
    cfg.s = o.s;
    cfg.kappa = o.kappa;
    cfg.tau = o.tau;
    CanonicalParams theta{o.beta, cfg.resolved_mu(), o.rho, o.sigma, o.tau};
    RngStream rng(o.seed, 0);
    const CanonicalData d = sample_canonical(theta, o.ell, o.s, rng);
    *os << "block,index,x,y\n";
    for (int i = 0; i < o.ell; ++i)
      *os << "z," << i << ',' << format_g17(d.x_z(i)) << ',' << format_g17(d.y_z(i)) << '\n';
    for (int j = 0; j < o.s; ++j)
      *os << "r," << j << ',' << format_g17(d.x_r(j)) << ',' << format_g17(d.y_r(j)) << '\n';
  } else if (o.kind == "raw") {
    StructuralParams p;
    p.beta = o.beta;
    p.alpha = o.alpha;
    p.alpha_x = o.alpha_x;
    p.rho = o.rho;
    p.sigma = o.sigma;
    p.tau = o.tau;
    p.gamma = VectorXd::Zero(o.k);
    p.gamma_x = VectorXd::Zero(o.k);
    if (o.pi.empty()) {
      p.pi = VectorXd::Ones(o.ell);
    } else {
      std::vector<double> vals;
      std::stringstream ss(o.pi);
      std::string item;
      while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
      p.pi = Eigen::Map<VectorXd>(vals.data(), static_cast<long>(vals.size()));
    }
    // Z, W entries iid N(0, 1): the fixed simulation default
    RngStream zw_rng(o.seed, 0);
    MatrixXd z(o.n, p.ell()), w(o.n, o.k);
    for (int j = 0; j < p.ell(); ++j)
      for (int i = 0; i < o.n; ++i) z(i, j) = zw_rng.normal();
    for (int j = 0; j < o.k; ++j)
      for (int i = 0; i < o.n; ++i) w(i, j) = zw_rng.normal();
    RngStream rng(o.seed, 1);
    const RawDataset d = sample_raw(p, z, w, rng);
    *os << "y,x";
    for (int j = 0; j < p.ell(); ++j) *os << ",z" << (j + 1);
    for (int j = 0; j < o.k; ++j) *os << ",w" << (j + 1);
    *os << '\n';
    for (int i = 0; i < o.n; ++i) {
      *os << format_g17(d.y(i)) << ',' << format_g17(d.x(i));
      for (int j = 0; j < p.ell(); ++j) *os << ',' << format_g17(d.z(i, j));
      for (int j = 0; j < o.k; ++j) *os << ',' << format_g17(d.w(i, j));
      *os << '\n';
    }
  } else {
    throw config_error("unknown sample kind: " + o.kind + " (expected canonical|raw)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control-function shrinkage IV estimation toolkit"};
  app.require_subcommand(1);

  SimulateOpts sim_opts;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "run the bias Monte Carlo over a parameter grid, write CSV");
  sim_cmd->add_option("--config", sim_opts.config, "flat key = value config file");
  sim_cmd->add_option("--out", sim_opts.out, "output CSV path");
  sim_cmd->add_option("--ell", sim_opts.ell, "instrument counts (comma list)");
  sim_cmd->add_option("--s", sim_opts.s, "residual dimensions (comma list)");
  sim_cmd->add_option("--kappa", sim_opts.kappa, "noncentrality values (comma list)");
  sim_cmd->add_option("--rho", sim_opts.rho, "noise correlations (comma list)");
  sim_cmd->add_option("--lambda", sim_opts.lambda, "shrinkage strengths lambda = p*s (comma list)");
  sim_cmd->add_option("--p", sim_opts.p, "tuning constants p (comma list; alternative to --lambda)");
  sim_cmd->add_option("--estimators", sim_opts.estimators,
                      "shrinkage variants to compare (default harmonic)");
  sim_cmd->add_option("--beta", sim_opts.beta, "target coefficient");
  sim_cmd->add_option("--sigma", sim_opts.sigma, "outcome noise scale");
  sim_cmd->add_option("--tau", sim_opts.tau, "first-stage noise scale");
  sim_cmd->add_option("--reps", sim_opts.reps, "replications per cell");
  sim_cmd->add_option("--seed", sim_opts.seed, "master seed");
  sim_cmd->add_option("--mode", sim_opts.mode, "full|rb");
  sim_cmd->add_option("--workers", sim_opts.workers, "parallel workers (0 = machine)");

  int or_ell = 0;
  double or_kappa = 0.0;
  std::string or_lambda;
  auto* or_cmd = app.add_subcommand("oracle", "print analytic bias quantities");
  or_cmd->add_option("--ell", or_ell, "number of instruments")->required();
  or_cmd->add_option("--kappa", or_kappa, "noncentrality")->required();
  or_cmd->add_option("--lambda", or_lambda, "lambda values for B(lambda) (comma list)");

  int inv_ell = 0, inv_s = 0;
  long inv_trials = 1000;
  std::uint64_t inv_seed = 1;
  bool inv_shear = false;
  auto* inv_cmd = app.add_subcommand("invariance", "run the invariance suite");
  inv_cmd->add_option("--ell", inv_ell, "instrument dimension")->required();
  inv_cmd->add_option("--s", inv_s, "residual dimension")->required();
  inv_cmd->add_option("--trials", inv_trials, "random triples to check");
  inv_cmd->add_option("--seed", inv_seed, "master seed");
  inv_cmd->add_flag("--shear-only-z", inv_shear,
                    "test hook: corrupt the sample action (suite must fail)");

  SampleOpts sample_opts;
  auto* sample_cmd =
      app.add_subcommand("sample", "dump one raw or canonical dataset as CSV");
  sample_cmd->add_option("--kind", sample_opts.kind, "canonical|raw");
  sample_cmd->add_option("--out", sample_opts.out, "output path (default stdout)");
  sample_cmd->add_option("--ell", sample_opts.ell, "instrument dimension");
  sample_cmd->add_option("--s", sample_opts.s, "residual dimension (canonical)");
  sample_cmd->add_option("--n", sample_opts.n, "observations (raw)");
  sample_cmd->add_option("--k", sample_opts.k, "controls (raw)");
  sample_cmd->add_option("--kappa", sample_opts.kappa, "noncentrality (canonical)");
  sample_cmd->add_option("--beta", sample_opts.beta, "target coefficient");
  sample_cmd->add_option("--rho", sample_opts.rho, "noise correlation");
  sample_cmd->add_option("--sigma", sample_opts.sigma, "outcome noise scale");
  sample_cmd->add_option("--tau", sample_opts.tau, "first-stage noise scale");
  sample_cmd->add_option("--alpha", sample_opts.alpha, "outcome intercept (raw)");
  sample_cmd->add_option("--alpha-x", sample_opts.alpha_x, "first-stage intercept (raw)");
  sample_cmd->add_option("--pi", sample_opts.pi, "instrument coefficients (raw, comma list)");
  sample_cmd->add_option("--seed", sample_opts.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim_cmd) return run_simulate(sim_opts);
    if (*or_cmd) return run_oracle(or_ell, or_kappa, or_lambda);
    if (*inv_cmd) return run_invariance(inv_ell, inv_s, inv_trials, inv_seed, inv_shear);
    if (*sample_cmd) return run_sample(sample_opts);
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
