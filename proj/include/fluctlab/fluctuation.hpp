#pragma once

#include <complex>
#include <optional>

#include "fluctlab/dynamics.hpp"
#include "fluctlab/polynomial.hpp"
#include "fluctlab/stats.hpp"
#include "fluctlab/variational.hpp"

namespace fluctlab {

// Smooth periodic test function H on the torus (0,1].
class TestFunction {
 public:
  // sqrt(2) cos(2 pi mode u + phase); mode 0 gives the constant 1.
  static TestFunction fourier(int mode, double phase = 0.0);
  static TestFunction constant(double value);
  // Values on the uniform grid u_i = (i+1)/n; derivatives via trigonometric
  // interpolation, so the input should sample a smooth periodic function.
  static TestFunction tabulated(std::vector<double> values);

  double value(double u) const;
  double deriv(double u) const;
  double deriv2(double u) const;

  // Fourier coefficients c_k = int_0^1 H(u) e^{-2 pi i k u} du for |k| <= max_mode.
  std::vector<std::complex<double>> fourier_coeffs(int max_mode) const;

  bool is_fourier() const { return kind_ == Kind::fourier; }
  int mode() const { return mode_; }
  double phase() const { return phase_; }
  std::string describe() const;

 private:
  enum class Kind { fourier, tabulated } kind_ = Kind::fourier;
  int mode_ = 0;
  double phase_ = 0.0;
  double amplitude_ = 1.0;
  // tabulated kind: complex spectrum c_k, k = -K..K
  std::vector<std::complex<double>> spectrum_;
  int max_mode_ = 0;
};

// Empirical energy fluctuation field
//   Y(H) = 1/sqrt(N) sum_x H(x/N) (p_x^2 - y^2)
// on the periodic chain (site i maps to u = (i+1)/N). Open topology is an error.
double field_eval(const VelocityField& p, const TestFunction& H, double y);

// Stationary covariance of the limiting generalized Ornstein-Uhlenbeck field:
//   E[Y_t(H1) Y_s(H2)] = 2 y^4 < S_{t-s} H1, H2 >
// with S the heat semigroup of a_hat * Laplacian on the torus. Negative lags
// are an error (use symmetry at the call site).
double ou_covariance_predict(const TestFunction& H1, const TestFunction& H2, double lag, double y,
                             double a_hat);

// Replica-averaged lag covariance of two recorded field series. series[r][t]
// holds Y values on a uniform grid of spacing grid_dt; lags are in grid units.
StatSeries empirical_time_covariance(const std::vector<std::vector<double>>& series1,
                                     const std::vector<std::vector<double>>& series2,
                                     const std::vector<int>& lag_indices, double grid_dt);

enum class CltTarget { A, B, H, combo };

struct CltSpec {
  CltTarget target = CltTarget::B;
  int N = 8;               // open chain with sites -N..N
  double y = 1.0;
  Coupling coupling = Coupling::constant(1.0);
  LocalFunction F;         // for H and combo targets
  double a_hat = 1.0;      // for combo
  double t_total = 1000.0; // unaccelerated time
  double dt = 0.02;
  int replicas = 64;
  int windows_per_replica = 1;  // split each trajectory into this many disjoint windows
  std::uint64_t seed = 2024;
  int threads = 1;
};

// (1/t) E[( int_0^t V ds )^2] for V in {A, B, H^F, B + a_hat A - H^F} on the
// open chain started from the uniform energy sphere, with replica error bars.
// The grid carries fractions of the window length as a t-extrapolation
// diagnostic (estimates at t/4, t/2, 3t/4, t).
StatSeries clt_time_variance(const CltSpec& spec);

// Per-replica estimates at the full window length; replicas with equal seeds
// share trajectories across calls (observable evaluation draws no randomness),
// which enables paired comparisons between targets.
std::vector<double> clt_time_variance_samples(const CltSpec& spec);

struct BgSpec {
  int N = 32;  // periodic sites
  double y = 1.0;
  Coupling coupling = Coupling::gaussian_bump(0.5, 1.0);
  TestFunction H = TestFunction::fourier(1);
  double T = 0.5;          // macroscopic duration (accelerated dynamics)
  double dt_macro = 5e-5;
  int replicas = 200;
  std::uint64_t seed = 77;
  int threads = 1;
};

// Per-replica time integrals of the three pieces of the fluctuation-dissipation
// residual
//   I(b, F) = int sqrt(N) sum_x grad_N H(x/N) [ W_{x,x+1} + b (p_{x+1}^2 - p_x^2)
//                                                 - (L tau^x F) ] ds,
// so residuals for any coefficient b and any F in the supplied list assemble
// by post-processing: I = current + b * gradient - dissipative[f].
struct BgIntegrals {
  std::vector<double> current_term;
  std::vector<double> gradient_term;
  std::vector<std::vector<double>> dissipative;  // [f][replica]
};

BgIntegrals bg_residual_integrals(const BgSpec& spec, const std::vector<LocalFunction>& Fs);

// E[I(a_hat, F)^2] with replica error bars.
StatSeries bg_residual(const BgSpec& spec, const LocalFunction& F, double a_hat);

}  // namespace fluctlab
