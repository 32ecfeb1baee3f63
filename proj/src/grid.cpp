#include "cfshrink/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cfshrink/errors.hpp"

namespace cfshrink {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw config_error("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw config_error("not a number: '" + s + "'");
  return v;
}

long parse_long(const std::string& s) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw config_error("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw config_error("not an integer: '" + s + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) out.push_back(static_cast<int>(parse_long(item)));
  return out;
}

}  // namespace

void ExperimentGrid::validate() const {
  if (ell.empty() || s.empty() || kappa.empty() || rho.empty())
    throw config_error("empty grid: ell, s, kappa and rho lists must be nonempty");
  if (!lambda.empty() && !p.empty())
    throw config_error("give lambda or p, not both");
  if (estimators.empty()) throw config_error("empty grid: no estimators");
  if (reps < 1) throw config_error("reps must be >= 1");
}

namespace {

std::vector<double> cell_strengths(const ExperimentGrid& grid, int ell, int s) {
  // resolved as lambda values
  if (!grid.lambda.empty()) return grid.lambda;
  if (!grid.p.empty()) {
    std::vector<double> out;
    for (double pv : grid.p) out.push_back(pv * s);
    return out;
  }
  return {static_cast<double>(default_tuning(ell, s) * s)};
}

}  // namespace

std::vector<CellRun> run_grid(const ExperimentGrid& grid) {
  grid.validate();
  std::vector<CellRun> runs;
  for (int ell : grid.ell)
    for (int s : grid.s)
      for (double kappa : grid.kappa)
        for (double rho : grid.rho)
          for (double lambda : cell_strengths(grid, ell, s)) {
            SimConfig cfg;
            cfg.ell = ell;
            cfg.s = s;
            cfg.kappa = kappa;
            cfg.beta = grid.beta;
            cfg.rho = rho;
            cfg.sigma = grid.sigma;
            cfg.tau = grid.tau;
            cfg.reps = grid.reps;
            cfg.seed = grid.seed;
            cfg.mode = grid.mode;
            for (Shrinkage v : grid.estimators)
              cfg.specs.push_back({v, lambda / s});
            CellRun run;
            run.cfg = cfg;
            run.result = compare_estimators(cfg, grid.workers);
            runs.push_back(std::move(run));
          }
  return runs;
}

void write_csv(const std::vector<CellRun>& runs, std::ostream& os) {
  os << "estimator,ell,s,kappa,rho,sigma,tau,lambda,reps,mode,seed,"
        "emp_bias,mc_se,oracle_bias,n_divergent,dominates_2sls\n";
  for (const auto& run : runs) {
    for (const auto& row : run.result.rows) {
      os << row.name << ',' << run.cfg.ell << ',' << run.cfg.s << ','
         << format_g17(run.cfg.kappa) << ',' << format_g17(run.cfg.rho) << ','
         << format_g17(run.cfg.sigma) << ',' << format_g17(run.cfg.tau) << ',';
      if (!std::isnan(row.lambda)) os << format_g17(row.lambda);
      os << ',' << run.cfg.reps << ',' << sim_mode_name(run.cfg.mode) << ','
         << run.cfg.seed << ',' << format_g17(row.emp_bias) << ','
         << format_g17(row.mc_se) << ',';
      if (row.oracle_bias) os << format_g17(*row.oracle_bias);
      os << ',' << row.n_divergent << ','
         << (row.verdict == Dominance::dominates ? "true" : "false") << '\n';
    }
  }
}

void write_summary(const std::vector<CellRun>& runs, std::ostream& os) {
  for (const auto& run : runs) {
    os << "cell ell=" << run.cfg.ell << " s=" << run.cfg.s
       << " kappa=" << format_g17(run.cfg.kappa)
       << " rho=" << format_g17(run.cfg.rho) << " reps=" << run.cfg.reps
       << " mode=" << sim_mode_name(run.cfg.mode) << " seed=" << run.cfg.seed
       << '\n';
    for (const auto& row : run.result.rows) {
      os << "  " << row.name;
      if (!std::isnan(row.lambda)) os << " (lambda=" << format_g17(row.lambda) << ")";
      os << ": emp_bias=" << format_g17(row.emp_bias)
         << " mc_se=" << format_g17(row.mc_se);
      if (row.oracle_bias) os << " oracle=" << format_g17(*row.oracle_bias);
      if (row.n_divergent > 0) os << " divergent=" << row.n_divergent;
      if (row.verdict != Dominance::self)
        os << " vs_2sls=" << dominance_name(row.verdict);
      os << '\n';
    }
  }
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(path + ":" + std::to_string(lineno) +
                         ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

ExperimentGrid grid_from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentGrid grid;
  for (const auto& [key, value] : kv) {
    if (key == "ell") grid.ell = parse_int_list(value);
    else if (key == "s") grid.s = parse_int_list(value);
    else if (key == "kappa") grid.kappa = parse_double_list(value);
    else if (key == "rho") grid.rho = parse_double_list(value);
    else if (key == "lambda") grid.lambda = parse_double_list(value);
    else if (key == "p") grid.p = parse_double_list(value);
    else if (key == "beta") grid.beta = parse_double(value);
    else if (key == "sigma") grid.sigma = parse_double(value);
    else if (key == "tau") grid.tau = parse_double(value);
    else if (key == "reps") grid.reps = parse_long(value);
    else if (key == "seed") grid.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "mode") grid.mode = sim_mode_from_name(value);
    else if (key == "out") grid.out = value;
    else if (key == "workers") grid.workers = static_cast<int>(parse_long(value));
    else if (key == "estimators") {
      grid.estimators.clear();
      for (const auto& name : split_list(value))
        grid.estimators.push_back(shrinkage_from_name(name));
    } else {
      throw config_error("unknown config key: " + key);
    }
  }
  return grid;
}

}  // namespace cfshrink
