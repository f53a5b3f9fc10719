#pragma once

#include <cstdint>
#include <vector>

#include "fluctlab/expectation.hpp"
#include "fluctlab/observable.hpp"
#include "fluctlab/rng.hpp"

namespace fluctlab {

struct SphereSpec {
  int dimension = 2;   // ambient dimension n; the sphere is S^{n-1}(r)
  double radius = 1.0;

  void validate() const {
    if (dimension < 2) throw std::invalid_argument("sphere: dimension must be >= 2");
    if (!(radius > 0.0)) throw std::invalid_argument("sphere: radius must be positive");
  }
};

// Uniform point on S^{n-1}(r): normalized Gaussian vector scaled by r.
std::vector<double> sample_sphere(const SphereSpec& spec, Rng& rng);

// Fills an existing buffer (hot-loop form).
void sample_sphere_into(std::vector<double>& out, const SphereSpec& spec, Rng& rng);

struct SphereMoment {
  double surface_integral;        // integral of prod (p_k^2)^{a_k} over the sphere
  double normalized_expectation;  // same divided by the surface area
};

// Closed form via log-Gamma:
//   S_n(a, r) = 2 prod Gamma(a_k + 1/2) / Gamma(a + n/2) * r^{2a + n - 1}.
SphereMoment moment_closed_form(const std::vector<int>& exponents, const SphereSpec& spec);

// Surface area (exponents all zero) and ball volume, in log-safe form.
double sphere_surface_area(const SphereSpec& spec);
double ball_volume(const SphereSpec& spec);

struct CheckResult {
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;
  double discrepancy_sigma = 0.0;  // (lhs - rhs) in combined-standard-error units
  double max_pointwise_gap = 0.0;  // telescoping only: max |integrand difference|
  bool pass(double n_sigma = 4.0) const {
    return std::abs(discrepancy_sigma) <= n_sigma;
  }
};

// Monte-Carlo check of the ball/surface identity
//   r * int_{B^n(r)} d_i f dp = int_{S^{n-1}(r)} f s_i dsigma.
// Ball points are rejection-free: sphere point times r * U^{1/n}.
CheckResult divergence_check(const Observable& f, int coord, const SphereSpec& spec, int samples,
                             Rng& rng);

// Paired Monte-Carlo check of the sphere telescoping identity
//   E[ X_{i,j}(f) p_i p_j ] = E[ sum_{k=i}^{j-1} X_{k,k+1}(f) p_k p_{k+1} ]
// (equality holds for the integrals, not the integrands; the maximal pointwise
// gap is reported to document that).
CheckResult telescoping_check(const PolyObservable& f, int i, int j, const SphereSpec& spec,
                              int samples, Rng& rng);

struct EnsembleGap {
  double sphere_value = 0.0;
  double gaussian_value = 0.0;
  double scaled_gap = 0.0;  // N * |difference|
  double scaled_gap_se = 0.0;
  bool exact = true;
};

// N * | E_sphere[g] - E_gaussian[g] | on the sphere of radius y*sqrt(N) in R^N.
// Exact via closed forms when g is polynomial; Monte Carlo otherwise.
EnsembleGap ensemble_gap(const LocalFunction& g, int N, double y);
EnsembleGap ensemble_gap_mc(const Observable& g, int N, double y, int samples, Rng& rng);

}  // namespace fluctlab
