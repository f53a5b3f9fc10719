#pragma once

#include "fluctlab/dynamics.hpp"
#include "fluctlab/sphere.hpp"
#include "fluctlab/stats.hpp"

namespace fluctlab {

// Random-rotation (Kac) walk state on a sphere.
struct KacState {
  std::vector<double> x;
  long steps = 0;
};

KacState kac_init(const SphereSpec& spec, Rng& rng);

// One elementary event: uniform pair (i < j), uniform angle in [0, 2 pi),
// rotation in the (i,j) plane. The norm is preserved exactly.
void kac_step(KacState& state, Rng& rng);

// Monte-Carlo estimate of the Kac Dirichlet form
//   D(f) = E_{pair} (1/2pi) int dtheta E_sigma [ (f(R x) - f(x))^2 ].
MeanErr kac_dirichlet(const Observable& f, const SphereSpec& spec, int samples, Rng& rng);

struct PathLemmaResult {
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;
  double margin = 0.0;     // rhs - lhs
  double margin_se = 0.0;  // paired standard error
  bool violation = false;  // margin < -4 sigma
};

// Checks E_sigma[B_{i,i+k} f] <= 64 k sum_{j=0}^{k-1} E_sigma[B_{i+j,i+j+1} f],
// where B_{i,j} f = (1/2pi) int [f(R^theta_{i,j} x) - f(x)]^2 dtheta. The
// theta integral uses a uniform grid, which is exact for polynomial f (the
// integrand is a trigonometric polynomial in theta).
PathLemmaResult path_lemma_check(const PolyObservable& f, int i, int k, const SphereSpec& spec,
                                 int samples, Rng& rng);

// E_sigma[B_{i,j} f] alone, same quadrature-in-theta MC estimator.
MeanErr rotation_energy(const PolyObservable& f, int i, int j, const SphereSpec& spec, int samples,
                        Rng& rng);

enum class ProbeKind { energy_fourier_mode, site_energy };

struct RelaxationSpec {
  std::vector<int> N_list{4, 8, 16, 32};
  double y = 1.0;
  Coupling coupling = Coupling::constant(1.0);
  ProbeKind probe = ProbeKind::energy_fourier_mode;
  int mode = 1;
  double dt = 0.05;
  double run_time_per_tau = 4000.0;  // run length as a multiple of the expected tau ~ N^2
  double obs_spacing_per_tau = 0.02; // observation grid as a fraction of expected tau
  int replicas = 4;
  std::uint64_t seed = 5150;
  int threads = 1;
  bool accelerate = false;  // the gap statement is about unaccelerated dynamics
};

struct RelaxationResult {
  std::vector<int> N;
  std::vector<double> tau;      // slower of tau_int and tau_exp, replica-averaged
  std::vector<double> tau_se;
  double alpha = 0.0;           // least-squares exponent in tau ~ N^alpha
  double alpha_ci_low = 0.0;
  double alpha_ci_high = 0.0;
};

// Stationary autocorrelation times of mean-zero-on-spheres probes for the
// nearest-neighbor dynamics, with a power-law fit across N.
RelaxationResult relaxation_time(const RelaxationSpec& spec);

// Same measurement for the Kac walk, in units of elementary rotation events
// per site pair count; used as the mean-field comparison baseline.
RelaxationResult kac_relaxation_time(const std::vector<int>& N_list, double radius_scale,
                                     long events_per_site, int replicas, std::uint64_t seed,
                                     int threads = 1);

}  // namespace fluctlab
