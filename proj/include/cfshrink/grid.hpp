#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cfshrink/estimators.hpp"
#include "cfshrink/sim.hpp"

namespace cfshrink {

// Cross product of parameter lists driven by the `simulate` command.
// Exactly one of (lambda, p) may be set; with neither, each cell uses the
// bias-safe default lambda = ell - 2.
struct ExperimentGrid {
  std::vector<int> ell, s;
  std::vector<double> kappa, rho;
  std::vector<double> lambda;  // shrinkage strength lambda = p * s
  std::vector<double> p;       // alternative: p directly
  std::vector<Shrinkage> estimators{Shrinkage::harmonic};
  double beta = 0.0, sigma = 1.0, tau = 1.0;
  long reps = 100000;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::rao_blackwell;
  std::string out;
  int workers = 0;  // 0 = machine parallelism

  void validate() const;
};

struct CellRun {
  SimConfig cfg;
  SimResult result;
};

std::vector<CellRun> run_grid(const ExperimentGrid& grid);

// Fixed header, floats at 17 significant digits; the single machine-readable
// surface.
void write_csv(const std::vector<CellRun>& runs, std::ostream& os);

// Human-readable companion; every number printed here is also in the CSV.
void write_summary(const std::vector<CellRun>& runs, std::ostream& os);

// Flat `key = value` config text; lists comma-separated, '#' comments.
std::map<std::string, std::string> parse_config_file(const std::string& path);

ExperimentGrid grid_from_kv(const std::map<std::string, std::string>& kv);

std::string format_g17(double v);

}  // namespace cfshrink
