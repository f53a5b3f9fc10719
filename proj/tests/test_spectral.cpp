#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fluctlab/spectral.hpp"
#include "fluctlab/stats.hpp"

using namespace fluctlab;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
LocalFunction pm(int site, int power = 1) { return LocalFunction::site(site, power); }
}  // namespace

TEST_CASE("kac_step: exact norm conservation and mixing moments") {
  SphereSpec spec{8, 2.0};
  Rng rng(11);
  KacState state = kac_init(spec, rng);
  for (int i = 0; i < 1000000; ++i) kac_step(state, rng);
  double norm2 = 0.0;
  for (double v : state.x) norm2 += v * v;
  CHECK(std::sqrt(norm2) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(state.steps == 1000000);

  // After mixing, E[x1^2] = r^2 / N.
  RunningStat m2;
  for (int i = 0; i < 200000; ++i) {
    kac_step(state, rng);
    if (i % 4 == 0) m2.add(state.x[0] * state.x[0]);
  }
  CHECK(std::abs(m2.mean() - 4.0 / 8.0) <= 5.0 * m2.std_error());
}

TEST_CASE("kac_step on the circle uniformizes in one step") {
  SphereSpec spec{2, 1.0};
  Rng rng(5);
  // Start from a fixed point; a single step lands uniformly on the circle.
  RunningStat c1, c2, s1;
  for (int i = 0; i < 200000; ++i) {
    KacState st;
    st.x = {1.0, 0.0};
    kac_step(st, rng);
    const double phi = std::atan2(st.x[1], st.x[0]);
    c1.add(std::cos(phi));
    s1.add(std::sin(phi));
    c2.add(std::cos(2 * phi));
  }
  CHECK(std::abs(c1.mean()) <= 4.0 * c1.std_error());
  CHECK(std::abs(s1.mean()) <= 4.0 * s1.std_error());
  CHECK(std::abs(c2.mean()) <= 4.0 * c2.std_error());
}

TEST_CASE("kac_dirichlet: constants, radial functions, circle oracle") {
  SphereSpec spec{5, 1.7};
  Rng rng(2);
  PolyObservable c(LocalFunction::constant(3.0));
  CHECK(kac_dirichlet(c, spec, 20000, rng).mean == doctest::Approx(0.0));

  LocalFunction radial;
  for (int i = 0; i < 5; ++i) radial += pm(i, 2);
  PolyObservable frad(radial);
  CHECK(kac_dirichlet(frad, spec, 20000, rng).mean <= 1e-20);

  // f = x1^2 on the unit circle: oracle by 2-d angle quadrature of
  // (cos^2(phi+theta) - cos^2 phi)^2.
  SphereSpec circle{2, 1.0};
  PolyObservable f(pm(0, 2));
  const MeanErr mc = kac_dirichlet(f, circle, 400000, rng);
  double oracle = 0.0;
  const int g = 512;
  for (int i = 0; i < g; ++i) {
    const double phi = two_pi * (i + 0.5) / g;
    for (int j = 0; j < g; ++j) {
      const double theta = two_pi * (j + 0.5) / g;
      const double d = std::cos(phi + theta) * std::cos(phi + theta) - std::cos(phi) * std::cos(phi);
      oracle += d * d;
    }
  }
  oracle /= static_cast<double>(g) * g;
  CHECK(std::abs(mc.mean - oracle) <= 4.0 * mc.se);
}

TEST_CASE("poincare relation between rotation energy and the angular derivative") {
  // E[B_{i,j} f] <= 2 pi E[|X_{i,j} f|^2] within MC resolution.
  Rng rng(23);
  SphereSpec spec{5, std::sqrt(5.0)};
  for (int trial = 0; trial < 10; ++trial) {
    LocalFunction f;
    for (int t = 0; t < 4; ++t) {
      Monomial m;
      const int deg = 1 + static_cast<int>(rng.below(3));
      for (int d = 0; d < deg; ++d) m.emplace_back(static_cast<int>(rng.below(5)), 1);
      f += LocalFunction::monomial(m, rng.uniform_sym());
    }
    PolyObservable obs(f);
    const int i = static_cast<int>(rng.below(4));
    const int j = i + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(4 - i)));
    const MeanErr b = rotation_energy(obs, i, j, spec, 30000, rng);

    const LocalFunction xf = f.angular_derivative(i, j);
    RunningStat dir;
    std::vector<double> x;
    Rng rng2(rng.next_u64());
    for (int s = 0; s < 30000; ++s) {
      sample_sphere_into(x, spec, rng2);
      const double v = xf.eval(SiteView(x, 0));
      dir.add(v * v);
    }
    const double rhs = two_pi * dir.mean();
    const double se = std::sqrt(b.se * b.se + std::pow(two_pi * dir.std_error(), 2));
    CHECK(b.mean <= rhs + 4.0 * se);
  }
}

TEST_CASE("path lemma: trivial, adjacent-product, random polynomials") {
  Rng rng(31);
  SphereSpec spec6{6, std::sqrt(6.0)};

  PolyObservable c(LocalFunction::constant(1.0));
  PathLemmaResult r = path_lemma_check(c, 0, 3, spec6, 2000, rng);
  CHECK_FALSE(r.violation);
  CHECK(r.lhs == doctest::Approx(0.0));

  PolyObservable fxk(pm(0) * pm(4));
  r = path_lemma_check(fxk, 0, 4, spec6, 30000, rng);
  CHECK_FALSE(r.violation);
  CHECK(r.margin > 0.0);
  CHECK(r.lhs > 0.0);

  for (int N : {5, 8}) {
    SphereSpec spec{N, std::sqrt(static_cast<double>(N))};
    for (int trial = 0; trial < 6; ++trial) {
      LocalFunction f;
      for (int t = 0; t < 4; ++t) {
        Monomial m;
        const int deg = 1 + static_cast<int>(rng.below(3));
        for (int d = 0; d < deg; ++d)
          m.emplace_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(N))), 1);
        f += LocalFunction::monomial(m, rng.uniform_sym());
      }
      PolyObservable obs(f);
      const int k = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(N - 2)));
      const PathLemmaResult rr = path_lemma_check(obs, 0, k, spec, 20000, rng);
      CHECK_FALSE(rr.violation);
    }
  }

  CHECK_THROWS_AS(path_lemma_check(fxk, 0, 1, spec6, 100, rng), std::invalid_argument);
}

TEST_CASE("relaxation time: diffusive doubling and run-length guard") {
  RelaxationSpec spec;
  spec.N_list = {8, 16};
  spec.dt = 0.05;
  spec.run_time_per_tau = 2500.0;
  spec.obs_spacing_per_tau = 0.05;
  spec.replicas = 3;
  spec.seed = 9911;
  const RelaxationResult res = relaxation_time(spec);
  // tau(16)/tau(8) ~ (1 - cos(pi/4)) / (1 - cos(pi/8)) = 3.85 for a = 1.
  const double ratio = res.tau[1] / res.tau[0];
  CHECK(std::abs(ratio - 3.848) <= 0.3 * 3.848);

  // Too-short runs raise instead of returning garbage.
  std::vector<double> flat;
  Rng rng(3);
  for (int i = 0; i < 64; ++i) flat.push_back(rng.normal());
  // A strongly correlated short series: window cannot resolve.
  std::vector<double> slow(200);
  double x = 0.0;
  for (auto& v : slow) {
    x = 0.999 * x + 0.001 * rng.normal();
    v = x;
  }
  CHECK_THROWS_AS(integrated_autocorrelation(slow, 1.0), std::runtime_error);
}

TEST_CASE("kac walk relaxes in O(N) elementary events") {
  const RelaxationResult res = kac_relaxation_time({16, 32, 64}, 1.0, 6000, 3, 515);
  CHECK(res.alpha > 0.6);
  CHECK(res.alpha < 1.5);
}
