#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fluctlab/sphere.hpp"
#include "fluctlab/stats.hpp"

using namespace fluctlab;

namespace {
LocalFunction pm(int site, int power = 1) { return LocalFunction::site(site, power); }
}

TEST_CASE("sample_sphere: norm, symmetry, second moment") {
  SphereSpec spec{6, 2.5};
  Rng rng(42);
  RunningStat coord, coord2;
  for (int i = 0; i < 200000; ++i) {
    const auto x = sample_sphere(spec, rng);
    CHECK(std::abs(std::hypot(x[0], x[1], x[2]) * 0 +
                   std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] +
                             x[4] * x[4] + x[5] * x[5]) -
                   2.5) <= 1e-12 * 2.5);
    coord.add(x[1]);
    coord2.add(x[1] * x[1]);
  }
  CHECK(std::abs(coord.mean()) <= 4.0 * coord.std_error());
  // E[x^2] = r^2 / n from the closed form.
  const double expect = moment_closed_form({0, 1}, spec).normalized_expectation;
  CHECK(expect == doctest::Approx(2.5 * 2.5 / 6.0).epsilon(1e-12));
  CHECK(std::abs(coord2.mean() - expect) <= 4.0 * coord2.std_error());
}

TEST_CASE("moment_closed_form: circle values and surface area") {
  SphereSpec circle{2, 1.0};
  const SphereMoment m = moment_closed_form({1, 0}, circle);
  CHECK(m.surface_integral == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  CHECK(m.normalized_expectation == doctest::Approx(0.5).epsilon(1e-14));

  for (int n : {2, 3, 7, 40, 400}) {
    for (double r : {0.5, 1.0, 3.0}) {
      SphereSpec s{n, r};
      const double area = moment_closed_form({}, s).surface_integral;
      const double expect =
          2.0 * std::pow(std::numbers::pi, n / 2.0) * std::pow(r, n - 1) / std::tgamma(n / 2.0);
      CHECK(area == doctest::Approx(expect).epsilon(1e-11));
      CHECK(sphere_surface_area(s) == doctest::Approx(expect).epsilon(1e-11));
    }
  }
}

TEST_CASE("nearest-neighbor pair sum identity on energy spheres") {
  // sum_{i=-N}^{N-1} E[p_i^2 p_{i+1}^2] = 2N(2N+1) y^4 / (2N+3), exactly.
  for (double y : {1.0, 1.7}) {
    for (int N = 1; N <= 50; ++N) {
      const int n = 2 * N + 1;
      SphereSpec spec{n, y * std::sqrt(static_cast<double>(n))};
      double sum = 0.0;
      for (int i = 0; i < 2 * N; ++i) {
        std::vector<int> exps(static_cast<std::size_t>(i), 0);
        exps.push_back(1);
        exps.push_back(1);
        sum += moment_closed_form(exps, spec).normalized_expectation;
      }
      const double predict = 2.0 * N * (2.0 * N + 1.0) * std::pow(y, 4) / (2.0 * N + 3.0);
      CHECK(sum == doctest::Approx(predict).epsilon(1e-12));
    }
  }
}

TEST_CASE("moment_closed_form agrees with Monte Carlo across degrees") {
  Rng rng(1337);
  for (int n : {2, 5, 9}) {
    SphereSpec spec{n, 1.3 * std::sqrt(static_cast<double>(n))};
    std::vector<std::vector<int>> cases = {{1}, {2}, {1, 1}, {2, 1, 1}, {4}, {2, 2}};
    std::vector<std::vector<double>> pts(100000);
    for (auto& p : pts) p = sample_sphere(spec, rng);
    for (const auto& exps : cases) {
      if (static_cast<int>(exps.size()) > n) continue;
      RunningStat stat;
      for (const auto& p : pts) {
        double v = 1.0;
        for (std::size_t k = 0; k < exps.size(); ++k)
          for (int e = 0; e < exps[k]; ++e) v *= p[k] * p[k];
        stat.add(v);
      }
      const double closed = moment_closed_form(exps, spec).normalized_expectation;
      CHECK(std::abs(stat.mean() - closed) <= 4.0 * stat.std_error());
    }
  }
}

TEST_CASE("divergence_check examples") {
  Rng rng(5);
  SphereSpec circle{2, 1.0};

  PolyObservable unit(LocalFunction::constant(1.0));
  CheckResult r = divergence_check(unit, 0, circle, 50000, rng);
  CHECK(r.lhs == doctest::Approx(0.0));
  CHECK(std::abs(r.rhs) <= 4.0 * r.rhs_se);

  // f = p_i on the unit circle: both sides equal pi.
  PolyObservable coord(pm(0));
  r = divergence_check(coord, 0, circle, 200000, rng);
  CHECK(r.lhs == doctest::Approx(std::numbers::pi).epsilon(1e-12));  // exact: constant gradient
  CHECK(std::abs(r.rhs - std::numbers::pi) <= 4.0 * r.rhs_se);
  CHECK(r.pass());

  // Random degree-3 polynomials in dimension 5.
  SphereSpec s5{5, 1.4};
  for (int trial = 0; trial < 10; ++trial) {
    LocalFunction f;
    for (int t = 0; t < 5; ++t) {
      Monomial m;
      const int deg = 1 + static_cast<int>(rng.below(3));
      for (int d = 0; d < deg; ++d) m.emplace_back(static_cast<int>(rng.below(5)), 1);
      f += LocalFunction::monomial(m, rng.uniform_sym());
    }
    PolyObservable obs(f);
    const int coord_i = static_cast<int>(rng.below(5));
    const CheckResult rr = divergence_check(obs, coord_i, s5, 100000, rng);
    CHECK(rr.pass());
  }
}

TEST_CASE("telescoping_check: integrals agree, integrands differ") {
  Rng rng(99);
  SphereSpec spec{7, std::sqrt(7.0)};

  // f = p_i p_j: both sides vanish.
  PolyObservable fij(pm(1) * pm(4));
  CheckResult r = telescoping_check(fij, 1, 4, spec, 100000, rng);
  CHECK(std::abs(r.lhs) <= 4.0 * r.lhs_se);
  CHECK(r.pass());

  // Radial f: both sides identically zero.
  LocalFunction radial;
  for (int i = 0; i < 7; ++i) radial += pm(i, 2);
  PolyObservable frad(radial * radial);
  r = telescoping_check(frad, 0, 5, spec, 2000, rng);
  CHECK(r.lhs == doctest::Approx(0.0));
  CHECK(r.rhs == doctest::Approx(0.0));
  CHECK(r.max_pointwise_gap <= 1e-10);

  // Random polynomials: integrals agree within 4 sigma, integrands do not.
  for (int trial = 0; trial < 10; ++trial) {
    LocalFunction f;
    for (int t = 0; t < 4; ++t) {
      Monomial m;
      const int deg = 1 + static_cast<int>(rng.below(3));
      for (int d = 0; d < deg; ++d) m.emplace_back(static_cast<int>(rng.below(7)), 1);
      f += LocalFunction::monomial(m, rng.uniform_sym());
    }
    PolyObservable obs(f);
    const CheckResult rr = telescoping_check(obs, 1, 5, spec, 150000, rng);
    CHECK(rr.pass());
    if (obs.poly().degree() >= 2) CHECK(rr.max_pointwise_gap > 1e-9);
  }
}

TEST_CASE("ensemble_gap closed forms") {
  // g = p_1^2: sphere expectation equals y^2 exactly, gap 0.
  for (int N : {8, 64}) {
    const EnsembleGap g2 = ensemble_gap(pm(0, 2), N, 1.3);
    CHECK(g2.sphere_value == doctest::Approx(1.3 * 1.3).epsilon(1e-12));
    CHECK(g2.scaled_gap == doctest::Approx(0.0).epsilon(1e-10));
  }

  // g = p_1^4: E_sphere = 3 N y^4 / (N+2); scaled gap = 6 N y^4 / (N+2) -> 6 y^4.
  const double y = 1.1;
  for (int N : {8, 32, 256}) {
    const EnsembleGap g4 = ensemble_gap(pm(0, 4), N, y);
    const double y4 = std::pow(y, 4);
    CHECK(g4.sphere_value == doctest::Approx(3.0 * N * y4 / (N + 2.0)).epsilon(1e-12));
    CHECK(g4.scaled_gap == doctest::Approx(6.0 * N * y4 / (N + 2.0)).epsilon(1e-10));
  }

  // Boundedness: no growth trend in log-log slope over N in {8..256}.
  for (const LocalFunction& g : {pm(0, 4), pm(0, 2) * pm(1, 2)}) {
    std::vector<double> ln, lg;
    for (int N : {8, 16, 32, 64, 128, 256}) {
      ln.push_back(std::log(static_cast<double>(N)));
      lg.push_back(std::log(ensemble_gap(g, N, 1.0).scaled_gap));
    }
    const LinFit fit = linear_fit(ln, lg);
    CHECK(std::abs(fit.slope) <= 0.1);
  }

  // Monte Carlo route agrees with closed forms.
  Rng rng(3);
  PolyObservable g22(pm(0, 2) * pm(1, 2));
  const EnsembleGap mc = ensemble_gap_mc(g22, 16, 1.0, 400000, rng);
  const EnsembleGap cf = ensemble_gap(pm(0, 2) * pm(1, 2), 16, 1.0);
  CHECK(std::abs(mc.sphere_value - cf.sphere_value) <= 4.0 * mc.scaled_gap_se / 16.0);
}
