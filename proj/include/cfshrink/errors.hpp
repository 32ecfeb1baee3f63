#pragma once

#include <stdexcept>

namespace cfshrink {

// The CLI maps these to exit codes: config_error -> 2, numeric_error -> 3.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No instrument signal in the sample: ||x_z|| = 0.
struct degenerate_first_stage : numeric_error {
  using numeric_error::numeric_error;
};

// Regression design lost rank (e.g. mu_hat = 0 makes both columns equal).
struct estimator_undefined : numeric_error {
  using numeric_error::numeric_error;
};

// Shrinkage factor hit zero exactly; the estimator diverges there.
struct divergence_error : numeric_error {
  using numeric_error::numeric_error;
};

}  // namespace cfshrink
