#pragma once

#include <filesystem>

#include "fluctlab/config.hpp"
#include "fluctlab/fluctuation.hpp"

namespace fluctlab {

// Executes the configured experiment and writes its artifacts (CSV/JSON plus
// manifest.json) atomically into the output directory. Returns the process
// exit code: 0 on success; on failure a machine-readable error JSON is
// printed to stdout and a nonzero code returned.
int run_experiment(const ExperimentConfig& config);

std::filesystem::path experiment_out_dir(const ExperimentConfig& config);

struct ExpDecayFit {
  double rate = 0.0;
  double rate_se = 0.0;
  double amplitude = 0.0;
  double amplitude_se = 0.0;
  int points = 0;
};

// Weighted log-linear fit of a decaying covariance series over the lag window
// where the expected ratio to the lag-0 value lies in [0.15, 0.95].
ExpDecayFit fit_exponential_decay(const StatSeries& series, double rate_guess);

}  // namespace fluctlab
