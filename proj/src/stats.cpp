#include "fluctlab/stats.hpp"

#include <algorithm>
#include <numeric>

namespace fluctlab {

MeanErr mean_stderr(std::span<const double> xs) {
  RunningStat s;
  for (double x : xs) s.add(x);
  return MeanErr{s.mean(), s.std_error(), s.count()};
}

LinFit linear_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> sigma(x.size(), 1.0);
  return linear_fit_weighted(x, y, sigma);
}

LinFit linear_fit_weighted(std::span<const double> x, std::span<const double> y,
                           std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() != sigma.size() || x.size() < 2)
    throw std::invalid_argument("linear fit: need matching arrays with >= 2 points");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (det <= 0.0) throw std::runtime_error("linear fit: degenerate abscissae");
  LinFit f;
  f.slope = (sw * swxy - swx * swy) / det;
  f.intercept = (swxx * swy - swx * swxy) / det;
  f.slope_se = std::sqrt(sw / det);
  f.intercept_se = std::sqrt(swxx / det);
  return f;
}

std::vector<double> autocovariance(std::span<const double> x, int max_lag) {
  const auto n = static_cast<long>(x.size());
  if (max_lag >= n) throw std::invalid_argument("autocovariance: lag beyond series");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (long t = 0; t + lag < n; ++t) s += (x[static_cast<std::size_t>(t)] - mean) *
                                            (x[static_cast<std::size_t>(t + lag)] - mean);
    c[static_cast<std::size_t>(lag)] = s / static_cast<double>(n);
  }
  return c;
}

TauResult integrated_autocorrelation(std::span<const double> x, double grid_dt,
                                     double window_factor) {
  const auto n = static_cast<long>(x.size());
  if (n < 16) throw std::invalid_argument("autocorrelation: series too short");
  const int max_lag = static_cast<int>(n / 2);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);

  // The windowing search rarely needs more than a few hundred lags, so the
  // autocovariance grows lazily in blocks instead of the full n^2/2 sweep.
  std::vector<double> c;
  const auto extend_to = [&](int lag_needed) {
    const int want = std::min(lag_needed, max_lag);
    for (int lag = static_cast<int>(c.size()); lag <= want; ++lag) {
      double s = 0.0;
      for (long t = 0; t + lag < n; ++t)
        s += (x[static_cast<std::size_t>(t)] - mean) * (x[static_cast<std::size_t>(t + lag)] - mean);
      c.push_back(s / static_cast<double>(n));
    }
  };
  extend_to(64);
  if (c[0] <= 0.0) throw std::runtime_error("autocorrelation: zero variance series");

  TauResult out;
  double tau = 0.5;
  int window = max_lag;
  for (int w = 1; w <= max_lag; ++w) {
    if (w >= static_cast<int>(c.size())) extend_to(2 * static_cast<int>(c.size()));
    tau += c[static_cast<std::size_t>(w)] / c[0];
    if (static_cast<double>(w) >= window_factor * tau) {
      window = w;
      out.resolved = true;
      break;
    }
  }
  if (!out.resolved)
    throw std::runtime_error(
        "autocorrelation: window not resolved within the run; a longer series is required");
  out.window = window;
  out.tau_int = std::max(tau, 0.5) * grid_dt;
  out.tau_int_se = out.tau_int *
                   std::sqrt(2.0 * (2.0 * window + 1.0) / static_cast<double>(n));

  // Exponential tail: fit log rho where rho is cleanly resolved.
  const int fit_max = std::min(max_lag, 4 * window);
  extend_to(fit_max);
  std::vector<double> lx, ly;
  for (int w = 1; w <= fit_max; ++w) {
    const double rho = c[static_cast<std::size_t>(w)] / c[0];
    if (rho <= 0.2 || rho >= 0.9) continue;
    lx.push_back(static_cast<double>(w) * grid_dt);
    ly.push_back(std::log(rho));
  }
  if (lx.size() >= 4) {
    const LinFit f = linear_fit(lx, ly);
    if (f.slope < 0.0) out.tau_exp = -1.0 / f.slope;
  }
  return out;
}

}  // namespace fluctlab
