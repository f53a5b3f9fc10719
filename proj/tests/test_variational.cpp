#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fluctlab/quadrature.hpp"
#include "fluctlab/stats.hpp"
#include "fluctlab/variational.hpp"

using namespace fluctlab;

namespace {

LocalFunction pm(int site, int power = 1) { return LocalFunction::site(site, power); }

LocalFunction random_even_poly(Rng& rng, int half_width, int n_terms) {
  LocalFunction f;
  for (int t = 0; t < n_terms; ++t) {
    Monomial m;
    const int deg = 2 * (1 + static_cast<int>(rng.below(2)));  // degree 2 or 4
    for (int d = 0; d < deg; ++d)
      m.emplace_back(-half_width + static_cast<int>(rng.below(2 * half_width + 1)), 1);
    f += LocalFunction::monomial(m, rng.uniform_sym());
  }
  return f;
}

}  // namespace

TEST_CASE("cyclic_gradient: closed forms") {
  // F = p0 p1: xi = p_{-1} p_1 + p_1^2 - p_0^2 - p_0 p_2.
  LocalFunction expected = pm(-1) * pm(1) + pm(1, 2);
  expected -= pm(0, 2);
  expected -= pm(0) * pm(2);
  CHECK(cyclic_gradient(pm(0) * pm(1)).same_terms(expected, 0.0));

  // F = p0^2: the formal sum is the total energy, so the gradient vanishes.
  CHECK(cyclic_gradient(pm(0, 2)).is_zero());
  CHECK(cyclic_gradient(LocalFunction::constant(3.0)).is_zero());

  // Translation invariance: xi(F) = xi(tau F).
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const LocalFunction F = random_even_poly(rng, 2, 3);
    CHECK(cyclic_gradient(F).same_terms(cyclic_gradient(F.translated(1)), 1e-12));
  }
}

TEST_CASE("quadratic_form special values") {
  CHECK(quadratic_form(1.0, LocalFunction(), Coupling::constant(1.0)) == doctest::Approx(1.0));
  const double y = 1.4;
  CHECK(quadratic_form(y, LocalFunction(), Coupling::constant(1.0)) ==
        doctest::Approx(std::pow(y, 4)).epsilon(1e-12));

  // F = p0 p1, a = 1, y = 1: value 7 = y^4 + E[xi^2] with E[xi^2] = 6 y^4,
  // verified against a 10^7-sample Monte Carlo oracle.
  const double q = quadratic_form(1.0, pm(0) * pm(1), Coupling::constant(1.0));
  CHECK(q == doctest::Approx(7.0).epsilon(1e-12));
  Rng rng(99);
  RunningStat mc;
  const LocalFunction xi = cyclic_gradient(pm(0) * pm(1));
  for (int i = 0; i < 10000000; ++i) {
    std::vector<double> p(6);
    for (auto& v : p) v = rng.normal();
    SiteView view(p, -2);
    const double t = view[0] * view[1] + xi.eval(view);
    mc.add(t * t);
  }
  CHECK(std::abs(mc.mean() - q) <= 4.0 * mc.std_error());

  // Bump coupling at F = 0 equals the weighted pair moment and matches MC.
  const Coupling bump = Coupling::gaussian_bump(0.5, 1.0);
  const double q0 = quadratic_form(1.0, LocalFunction(), bump);
  RunningStat mcb;
  for (int i = 0; i < 2000000; ++i) {
    const double p0 = rng.normal();
    const double p1 = rng.normal();
    mcb.add(bump(p0, p1) * p0 * p0 * p1 * p1);
  }
  CHECK(std::abs(mcb.mean() - q0) <= 4.0 * mcb.std_error());
}

TEST_CASE("quadratic_form consistency: independent quadrature route") {
  // Same integrand assembled independently and integrated by tensor
  // Gauss-Hermite over the full support.
  const Coupling bump = Coupling::gaussian_bump(0.5, 1.0);
  const double y = 1.2;
  for (const LocalFunction& F : {pm(0) * pm(1), pm(0, 2) * pm(1, 2)}) {
    LocalFunction integrand = pm(0) * pm(1) + cyclic_gradient(F);
    integrand = integrand * integrand;
    PolyObservable poly(integrand);
    const auto sup = poly.support();
    FnObservable weighted([&](const SiteView& p) { return bump(p[0], p[1]) * integrand.eval(p); },
                          nullptr, nullptr, sup);
    const double via_quadrature = gaussian_expectation(weighted, y, 32, {6, 2000000000L});
    const double via_moments = quadratic_form(y, F, bump);
    CHECK(via_moments == doctest::Approx(via_quadrature).epsilon(1e-10));
  }
}

TEST_CASE("default basis structure") {
  // Degree-2 classes on sites -k..k after translation dedup: gaps 1..2k.
  CHECK(default_basis(3, 1).size() == 2);
  CHECK(default_basis(3, 2).size() == 4);
  CHECK(default_basis(2, 2).size() == 4);
  const auto b42 = default_basis(4, 2);
  CHECK(b42.size() == 39);
  // Radial monomials and constants never appear.
  for (const auto& F : b42) CHECK_FALSE(cyclic_gradient(F).is_zero());
}

TEST_CASE("minimize: exact gradient case for every basis up to (3,2)") {
  for (double a0 : {0.5, 1.0, 2.0}) {
    const Coupling a = Coupling::constant(a0);
    for (double y : {0.8, 1.0, 1.6}) {
      for (int d : {1, 2, 3}) {
        for (int k : {0, 1, 2}) {
          const auto basis = default_basis(d, k);
          const DiffusionResult res = minimize_diffusion_coefficient(y, basis, a);
          CHECK(std::abs(res.a_hat - a0) <= 1e-10);
          for (double c : res.coefficients) CHECK(std::abs(c) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("minimize: empty basis, orthogonality, bounds, monotonicity") {
  const Coupling bump = Coupling::gaussian_bump(0.5, 1.0);
  const double y = 1.0;

  const DiffusionResult empty = minimize_diffusion_coefficient(y, {}, bump);
  CHECK(empty.a_hat ==
        doctest::Approx(quadratic_form(y, LocalFunction(), bump)).epsilon(1e-12));

  // Condition ii orthogonality for every default basis element.
  for (const auto& F : default_basis(4, 2)) {
    const LocalFunction xi = cyclic_gradient(F);
    CHECK(std::abs(expect_gaussian(pm(0) * pm(1) * xi, y)) <= 1e-10);
  }

  // c <= a_hat <= C and monotonicity along nested bases.
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& [d, k] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {4, 1}, {4, 2}}) {
    const DiffusionResult res = minimize_diffusion_coefficient(y, default_basis(d, k), bump);
    CHECK(res.a_hat >= bump.lower_bound() - 1e-10);
    CHECK(res.a_hat <= bump.upper_bound() + 1e-10);
    if (d == 4 && k == 2) CHECK(res.a_hat <= prev + 1e-12);
    prev = std::min(prev, res.a_hat);
  }

  // Nested-basis monotonicity in finer steps: prefixes of the (4,2) basis.
  const auto basis = default_basis(4, 2);
  double last = std::numeric_limits<double>::infinity();
  for (std::size_t m : {std::size_t{0}, std::size_t{5}, std::size_t{20}, basis.size()}) {
    const std::vector<LocalFunction> sub(basis.begin(), basis.begin() + m);
    const double a_hat = minimize_diffusion_coefficient(y, sub, bump).a_hat;
    CHECK(a_hat <= last + 1e-12);
    last = a_hat;
  }

  // Degenerate basis: duplicated elements are dropped, value unchanged.
  std::vector<LocalFunction> dup = default_basis(4, 1);
  dup.push_back(dup.front());
  const DiffusionResult res_dup = minimize_diffusion_coefficient(y, dup, bump);
  const DiffusionResult res_ref = minimize_diffusion_coefficient(y, default_basis(4, 1), bump);
  CHECK(res_dup.a_hat == doctest::Approx(res_ref.a_hat).epsilon(1e-10));
  CHECK(res_dup.dropped_columns >= 1);
}

TEST_CASE("bump diffusion coefficient: regression baselines") {
  // Frozen values from this implementation (exact pair-moment route); they
  // pin the Ritz values so numerical regressions are caught.
  const Coupling bump = Coupling::gaussian_bump(0.5, 1.0);
  const DiffusionResult r0 = minimize_diffusion_coefficient(1.0, {}, bump);
  CHECK(r0.a_hat == doctest::Approx(1.1924500897298753).epsilon(1e-12));
  const DiffusionResult r41 = minimize_diffusion_coefficient(1.0, default_basis(4, 1), bump);
  CHECK(r41.a_hat == doctest::Approx(1.1847509085).epsilon(1e-8));
  const DiffusionResult r42 = minimize_diffusion_coefficient(1.0, default_basis(4, 2), bump);
  CHECK(r42.a_hat == doctest::Approx(1.1847383514).epsilon(1e-8));
  CHECK(r42.a_hat < r41.a_hat);          // k grows 1 -> 2 strictly improves
  CHECK(r42.a_hat >= 1.0);
  CHECK(r42.a_hat <= 1.5);
}

TEST_CASE("odd-degree basis terms carry zero weight") {
  // Global parity: odd-degree F pair to zero against p0 p1; including them
  // changes nothing.
  const Coupling bump = Coupling::gaussian_bump(0.5, 1.0);
  const auto even = default_basis(3, 1);
  const auto with_odd = default_basis(3, 1, true);
  CHECK(with_odd.size() > even.size());
  const DiffusionResult a = minimize_diffusion_coefficient(1.0, even, bump);
  const DiffusionResult b = minimize_diffusion_coefficient(1.0, with_odd, bump);
  CHECK(a.a_hat == doctest::Approx(b.a_hat).epsilon(1e-12));
}

TEST_CASE("membership conditions for the cyclic-gradient closure") {
  // All four conditions hold for cyclic gradients.
  const auto report = check_Hy_conditions(cyclic_gradient(pm(0) * pm(1)), 1.0);
  CHECK(report.mean_zero);
  CHECK(report.orthogonal);
  CHECK(report.commuting_bonds);
  CHECK(report.adjacent_identity);
  CHECK(report.all_pass());

  // Non-member witness: xi = p0 p1 fails exactly the orthogonality condition.
  const auto witness = check_Hy_conditions(pm(0) * pm(1), 1.0);
  CHECK(witness.mean_zero);
  CHECK_FALSE(witness.orthogonal);
  CHECK(witness.pairing_value == doctest::Approx(1.0));
  CHECK(witness.commuting_bonds);
  CHECK(witness.adjacent_identity);

  // Property test: cyclic gradients of 20 random polynomials pass all four.
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    LocalFunction F = random_even_poly(rng, 2, 3);
    F += random_even_poly(rng, 1, 2);
    const auto rep = check_Hy_conditions(cyclic_gradient(F), 1.3);
    CHECK(rep.all_pass());
  }
}

TEST_CASE("gradient_type_variance closed forms and trends") {
  const Coupling one = Coupling::constant(1.0);
  const double y = 1.0;

  // (1/2N) BB -> 4 y^4 and equals 4(2N+1)y^4/(2N+3) at finite N.
  for (int N : {2, 8, 20}) {
    const VarianceValue bb = gradient_type_variance(VarianceTarget::BB, N, y, one);
    const double expect = 8.0 * N * (2.0 * N + 1.0) / (2.0 * N + 3.0);
    CHECK(bb.exact);
    CHECK(bb.value == doctest::Approx(expect).epsilon(1e-12));
  }

  // (1/2N) AB = -4 (2N+1) y^4 / (2N+3) exactly, trending to -4 y^4.
  for (int N : {1, 2, 5, 8, 16, 40}) {
    const VarianceValue ab = gradient_type_variance(VarianceTarget::AB, N, y, one);
    CHECK(ab.value ==
          doctest::Approx(-8.0 * N * (2.0 * N + 1.0) / (2.0 * N + 3.0)).epsilon(1e-12));
  }
  const double tail =
      gradient_type_variance(VarianceTarget::AB, 200, y, one).value / (2.0 * 200);
  CHECK(tail == doctest::Approx(-4.0).epsilon(0.01));

  // F = 0: H-variance vanishes; BH polarization is finite and negative for
  // F = p0 p1 (the gradient pairs against the current direction).
  const VarianceValue hh0 =
      gradient_type_variance(VarianceTarget::HH, 6, y, one, LocalFunction());
  CHECK(hh0.value == doctest::Approx(0.0));

  const LocalFunction F = pm(0) * pm(1);
  const VarianceValue hh = gradient_type_variance(VarianceTarget::HH, 6, y, one, F);
  CHECK(hh.value > 0.0);

  // Monte Carlo route (bump coupling) agrees with the exact route when the
  // bump strength is taken to zero.
  const VarianceValue bb_mc = gradient_type_variance(
      VarianceTarget::BB, 4, y, Coupling::gaussian_bump(1e-12, 1.0), std::nullopt, 400000, 5);
  const VarianceValue bb_exact = gradient_type_variance(VarianceTarget::BB, 4, y, one);
  CHECK(bb_mc.value == doctest::Approx(bb_exact.value).epsilon(0.02));
}
