#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluctlab/expectation.hpp"
#include "fluctlab/polynomial.hpp"
#include "fluctlab/rng.hpp"

namespace fluctlab {

// Cyclic gradient of a local function F: the well-defined rotation derivative
// of the formal translation-invariant sum sum_j tau^j F at bond (0,1),
//   xi = p_1 dF~/dp_0 - p_0 dF~/dp_1,
// assembled from the finitely many translates of F that touch sites 0 and 1.
LocalFunction cyclic_gradient(const LocalFunction& F);

// a(y, F) = E_nu_y[ a(p_0,p_1) (p_0 p_1 + xi_F)^2 ]. Exact: the coupling only
// couples sites 0 and 1, so every monomial factorizes into a weighted pair
// moment times plain Gaussian moments.
double quadratic_form(double y, const LocalFunction& F, const Coupling& a);

struct DiffusionResult {
  double y = 1.0;
  std::string coupling;
  double a_hat = 0.0;      // y^-4 * minimized quadratic form
  double form_value = 0.0; // minimized E[a (p0 p1 + sum c_i xi_i)^2]
  std::vector<double> coefficients;
  std::vector<std::string> basis_labels;
  double gram_condition = 1.0;
  int dropped_columns = 0;
  // The fluctuation-dissipation decomposition subtracts L(tau^x F) with
  // F = bg_plug_scale * F_min; the stored coefficients describe F_min itself.
  double bg_plug_scale = 2.0;
};

// Ritz minimization of the quadratic form over span{basis}: solves the normal
// equations for min_c E[a (p0 p1 + sum_i c_i xi_i)^2] with xi_i the cyclic
// gradients of the basis functions. Rank-deficient Gram matrices are handled
// by a spectral pseudo-inverse (dependent columns dropped, reported).
DiffusionResult minimize_diffusion_coefficient(double y, const std::vector<LocalFunction>& basis,
                                               const Coupling& a);

// Default basis: monomials on sites -k..k with even total degree <= max degree
// (odd-degree terms pair to zero against p0 p1 under the even measure), with
// translation-equivalent monomials deduplicated and vanishing cyclic gradients
// dropped. include_odd keeps the odd-degree terms for diagnostics.
std::vector<LocalFunction> default_basis(int max_degree, int half_width, bool include_odd = false);

struct HyConditionReport {
  bool mean_zero = false;        // i)  E[xi] = 0
  bool orthogonal = false;       // ii) E[p0 p1 xi] = 0
  bool commuting_bonds = false;  // iii) disjoint-bond derivative identity
  bool adjacent_identity = false;// iv) adjacent-bond identity
  double mean_value = 0.0;
  double pairing_value = 0.0;
  double max_iii_violation = 0.0;
  double max_iv_violation = 0.0;
  std::string witness;  // first failing identity, when any
  bool all_pass() const { return mean_zero && orthogonal && commuting_bonds && adjacent_identity; }
};

// Membership conditions for the closure of cyclic gradients: i) and ii) by
// exact moments (tolerance 1e-10), iii) and iv) as symbolic polynomial
// identities over a window of index pairs covering the support of xi.
HyConditionReport check_Hy_conditions(const LocalFunction& xi, double y, double tol = 1e-10);

enum class VarianceTarget { BB, HH, BH, AB };

struct VarianceValue {
  double value = 0.0;
  double se = 0.0;  // zero for closed-form paths
  bool exact = true;
};

// Finite-N central-limit-theorem variances/covariances on the open chain of
// sites -N..N under the uniform measure on the energy sphere, computed without
// simulation:
//   BB: 2 D(sum_x x p_x^2)        (the current sum is L of that potential)
//   HH: 2 D(psi_F), psi_F = sum of translates of F inside the chain
//   BH: polarization of the same Dirichlet product
//   AB: -2 <p_N^2 - p_{-N}^2, sum_x x p_x^2>  via sphere moments
// Constant couplings evaluate exactly through sphere moments; otherwise the
// sphere expectation is Monte Carlo with mc_samples points.
VarianceValue gradient_type_variance(VarianceTarget target, int N, double y, const Coupling& a,
                                     const std::optional<LocalFunction>& F = std::nullopt,
                                     int mc_samples = 200000, std::uint64_t mc_seed = 99);

// sum of translates of F that fit inside sites -N..N.
LocalFunction chain_translate_sum(const LocalFunction& F, int N);

}  // namespace fluctlab
