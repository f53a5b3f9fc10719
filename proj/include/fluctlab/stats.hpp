#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluctlab {

// Welford accumulator.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MeanErr {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};

MeanErr mean_stderr(std::span<const double> xs);

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

LinFit linear_fit(std::span<const double> x, std::span<const double> y);
// Weighted least squares with per-point standard deviations.
LinFit linear_fit_weighted(std::span<const double> x, std::span<const double> y,
                           std::span<const double> sigma);

// Biased (1/n) autocovariance estimates up to max_lag inclusive.
std::vector<double> autocovariance(std::span<const double> x, int max_lag);

struct TauResult {
  double tau_int = 0.0;     // integrated autocorrelation time, in grid_dt units of time
  double tau_int_se = 0.0;  // Madras-Sokal error estimate
  double tau_exp = 0.0;     // exponential-tail fit (0 when the fit window is empty)
  int window = 0;
  bool resolved = false;
};

// Automatic-windowing integrated autocorrelation time plus an exponential
// tail fit. grid_dt converts lag indices to time. Throws if the window cannot
// be resolved inside the series.
TauResult integrated_autocorrelation(std::span<const double> x, double grid_dt,
                                     double window_factor = 6.0);

// Time/lag-indexed estimates with replica error bars and seed provenance.
struct StatSeries {
  std::string label;
  std::string grid_name = "lag";
  std::vector<double> grid;
  std::vector<double> estimate;
  std::vector<double> std_error;
  int replicas = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (grid.size() != estimate.size() || grid.size() != std_error.size())
      throw std::invalid_argument("stat series: ragged columns");
    for (double e : estimate)
      if (!std::isfinite(e)) throw std::invalid_argument("stat series: non-finite estimate");
    for (double s : std_error)
      if (!(s >= 0.0)) throw std::invalid_argument("stat series: negative standard error");
  }
};

}  // namespace fluctlab
