#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fluctlab/dynamics.hpp"
#include "fluctlab/expectation.hpp"
#include "fluctlab/observable.hpp"
#include "fluctlab/sphere.hpp"
#include "fluctlab/stats.hpp"

using namespace fluctlab;

namespace {

ModelParams make_params(int n, double y, Coupling a, Topology topo = Topology::periodic) {
  ModelParams p;
  p.n_sites = n;
  p.y = y;
  p.coupling = std::move(a);
  p.topology = topo;
  return p;
}

}  // namespace

TEST_CASE("bond_update: zero pair is a fixed point, pair energy exact") {
  VelocityField p{{0.0, 0.0, 1.0, -2.0}, Topology::periodic};
  Rng rng(1);
  bond_update(p, 0, 0.5, Coupling::constant(1.0), rng);
  CHECK(p.p[0] == 0.0);
  CHECK(p.p[1] == 0.0);

  const Coupling bump = Coupling::gaussian_bump(0.5, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    VelocityField q{{rng.normal(), rng.normal(), rng.normal()}, Topology::periodic};
    const double pair = q.p[1] * q.p[1] + q.p[2] * q.p[2];
    const double other = q.p[0];
    bond_update(q, 1, 0.05, bump, rng);
    CHECK(q.p[0] == other);
    CHECK(q.p[1] * q.p[1] + q.p[2] * q.p[2] == doctest::Approx(pair).epsilon(1e-14));
  }
}

TEST_CASE("bond_update for constant coupling is a gaussian angle increment") {
  // theta' - theta = sqrt(a dt) xi: check mean 0 and variance a dt.
  Rng rng(7);
  const double a0 = 1.7;
  const double dt = 0.03;
  RunningStat inc, inc2;
  for (int i = 0; i < 200000; ++i) {
    VelocityField p{{1.3, -0.4, 0.0}, Topology::periodic};
    const double theta0 = std::atan2(p.p[1], p.p[0]);
    bond_update(p, 0, dt, Coupling::constant(a0), rng);
    double d = std::atan2(p.p[1], p.p[0]) - theta0;
    if (d > M_PI) d -= 2 * M_PI;
    if (d < -M_PI) d += 2 * M_PI;
    inc.add(d);
    inc2.add(d * d);
  }
  CHECK(std::abs(inc.mean()) <= 4.0 * inc.std_error());
  CHECK(inc2.mean() == doctest::Approx(a0 * dt).epsilon(0.01));
}

TEST_CASE("bond_update weak order: generator consistency with Richardson") {
  // E[f(p')] - f(p) = dt (L_bond f)(p) + O(dt^2) for f = p_x^2; compare the
  // dt and dt/2 estimates extrapolated to zero against the generator applied
  // to the single bond.
  const Coupling bump = Coupling::gaussian_bump(0.5, 1.0);
  const VelocityField base{{0.9, -1.4, 0.3}, Topology::periodic};
  PolyObservable f(LocalFunction::site(0, 2));

  auto params = make_params(3, 1.0, bump, Topology::open);
  // Single-bond generator value at the base point.
  const double lf = apply_bond_generator(f, SiteView(base), 0, 1, bump);

  const long samples = 4000000;
  auto drift_estimate = [&](double dt, std::uint64_t seed) {
    Rng rng(seed);
    RunningStat s;
    for (long i = 0; i < samples; ++i) {
      VelocityField p = base;
      bond_update(p, 0, dt, bump, rng);
      s.add((p.p[0] * p.p[0] - base.p[0] * base.p[0]) / dt);
    }
    return MeanErr{s.mean(), s.std_error(), s.count()};
  };

  const MeanErr e1 = drift_estimate(0.02, 11);
  const MeanErr e2 = drift_estimate(0.01, 12);
  const double richardson = 2.0 * e2.mean - e1.mean;
  const double se = std::sqrt(4 * e2.se * e2.se + e1.se * e1.se);
  CHECK(std::abs(richardson - lf) <= 4.0 * se);
  // First-order consistency: the dt estimate itself is already within O(dt).
  CHECK(std::abs(e1.mean - lf) <= 0.1 * std::abs(lf) + 4.0 * e1.se);
  (void)params;
}

TEST_CASE("evolve: T = 0 identity, determinism, exact conservation") {
  auto params = make_params(16, 1.0, Coupling::gaussian_bump(0.5, 1.0));
  IntegratorConfig cfg;
  cfg.dt_macro = 1e-4;
  cfg.seed = 31;
  Rng rng(5);
  VelocityField p0 = sample_equilibrium(params, rng);

  const Trajectory t0 = evolve(p0, 0.0, params, cfg, {{"e", total_energy}});
  CHECK(t0.times.size() == 1);
  CHECK(t0.values[0][0] == doctest::Approx(total_energy(p0)).epsilon(1e-15));

  const Trajectory a = evolve(p0, 0.05, params, cfg, {{"e", total_energy}}, 10);
  const Trajectory b = evolve(p0, 0.05, params, cfg, {{"e", total_energy}}, 10);
  CHECK(a.values[0] == b.values[0]);
  CHECK(a.max_energy_drift <= 1e-12);

  // Unaccelerated open chain, longer run.
  auto params_open = make_params(32, 1.0, Coupling::constant(1.0), Topology::open);
  IntegratorConfig cfg2;
  cfg2.dt_macro = 0.02;
  cfg2.accelerate = false;
  cfg2.seed = 99;
  SphereSpec sphere{32, std::sqrt(32.0)};
  Rng rng2(17);
  VelocityField q;
  q.topology = Topology::open;
  q.p = sample_sphere(sphere, rng2);
  const Trajectory c = evolve(q, 100.0, params_open, cfg2, {{"e", total_energy}}, 100);
  CHECK(c.max_energy_drift <= 1e-12);
}

TEST_CASE("stability guard triggers on oversized drift steps") {
  // Large nearly-aligned pair + large dt so the drift angle exceeds the
  // configured ratio.
  const Coupling bump = Coupling::gaussian_bump(0.9, 0.4);
  VelocityField p{{8.0, 7.6, 1.0}, Topology::periodic};
  Rng rng(3);
  CHECK_THROWS_AS(bond_update(p, 0, 2.0, bump, rng, 0.1), StabilityError);
}

TEST_CASE("ergodic time average of p0^2 matches the equilibrium moment") {
  auto params = make_params(32, 1.0, Coupling::constant(1.0));
  IntegratorConfig cfg;
  cfg.dt_macro = 1e-3;
  cfg.accelerate = false;  // micro units; the average is over the p0^2 series
  cfg.dt_macro = 0.05;
  const int replicas = 8;
  std::vector<double> means;
  for (int r = 0; r < replicas; ++r) {
    cfg.seed = 100 + static_cast<std::uint64_t>(r);
    Rng rng(cfg.seed ^ 0x5555);
    VelocityField p = sample_equilibrium(params, rng);
    RunningStat avg;
    Rng dyn(cfg.seed);
    evolve_steps(p, 20000, params, cfg, dyn, [&](long s, const VelocityField& state) {
      if (s % 5 == 0) avg.add(state.p[0] * state.p[0]);
    });
    means.push_back(avg.mean());
  }
  const MeanErr m = mean_stderr(means);
  CHECK(std::abs(m.mean - 1.0) <= 4.0 * m.se);
}

TEST_CASE("detailed balance: marginal moments stay at equilibrium values") {
  auto params = make_params(24, 1.0, Coupling::gaussian_bump(0.5, 1.0));
  IntegratorConfig cfg;
  cfg.dt_macro = 5e-5;
  cfg.accelerate = true;
  const int replicas = 24;
  RunningStat m2_early, m2_late, m4_late, m22_late;
  for (int r = 0; r < replicas; ++r) {
    Rng rng = Rng::substream(4242, static_cast<std::uint64_t>(r));
    VelocityField p = sample_equilibrium(params, rng);
    IntegratorConfig c = cfg;
    RunningStat early, late4, late2, late22;
    evolve_steps(p, 4000, params, c, rng, [&](long s, const VelocityField& state) {
      const double v2 = state.p[0] * state.p[0];
      if (s < 1000) {
        early.add(v2);
      } else {
        late2.add(v2);
        late4.add(v2 * v2);
        late22.add(v2 * state.p[1] * state.p[1]);
      }
    });
    m2_early.add(early.mean());
    m2_late.add(late2.mean());
    m4_late.add(late4.mean());
    m22_late.add(late22.mean());
  }
  CHECK(std::abs(m2_early.mean() - m2_late.mean()) <=
        3.0 * std::hypot(m2_early.std_error(), m2_late.std_error()));
  CHECK(std::abs(m2_late.mean() - 1.0) <= 3.5 * m2_late.std_error());
  CHECK(std::abs(m4_late.mean() - 3.0) <= 3.5 * m4_late.std_error());
  CHECK(std::abs(m22_late.mean() - 1.0) <= 3.5 * m22_late.std_error());
}

TEST_CASE("sweep orders give statistically indistinguishable stationary moments") {
  auto params = make_params(16, 1.0, Coupling::gaussian_bump(0.5, 1.0));
  const auto run = [&](SweepOrder order, std::uint64_t seed) {
    IntegratorConfig cfg;
    cfg.dt_macro = 1e-4;
    cfg.sweep = order;
    std::vector<double> means;
    for (int r = 0; r < 16; ++r) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(r));
      VelocityField p = sample_equilibrium(params, rng);
      RunningStat m;
      evolve_steps(p, 2500, params, cfg, rng, [&](long s, const VelocityField& state) {
        if (s >= 500) m.add(state.p[0] * state.p[0] * state.p[1] * state.p[1]);
      });
      means.push_back(m.mean());
    }
    return mean_stderr(means);
  };
  const MeanErr eo = run(SweepOrder::even_odd, 7001);
  const MeanErr rs = run(SweepOrder::random_sequential, 7002);
  CHECK(std::abs(eo.mean - rs.mean) <= 3.0 * std::hypot(eo.se, rs.se));
}

TEST_CASE("microcanonical ergodicity from a deterministic point on the sphere") {
  // Start from all energy on one site; long-run single-site moments approach
  // the uniform-sphere predictions r^2/n and 3 r^4/(n(n+2)).
  const int n = 12;
  const double r = std::sqrt(static_cast<double>(n));  // y = 1 scale
  auto params = make_params(n, 1.0, Coupling::gaussian_bump(0.5, 1.0));
  IntegratorConfig cfg;
  cfg.dt_macro = 2e-4;
  const int replicas = 12;
  RunningStat mom2, mom4;
  for (int rep = 0; rep < replicas; ++rep) {
    VelocityField p;
    p.topology = Topology::periodic;
    p.p.assign(n, 0.0);
    p.p[0] = r;
    Rng rng = Rng::substream(808, static_cast<std::uint64_t>(rep));
    RunningStat s2, s4;
    evolve_steps(p, 6000, params, cfg, rng, [&](long s, const VelocityField& state) {
      if (s < 2000) return;  // burn-in from the atypical start
      const double v = state.p[5];
      s2.add(v * v);
      s4.add(v * v * v * v);
    });
    mom2.add(s2.mean());
    mom4.add(s4.mean());
  }
  const double e2 = r * r / n;
  const double e4 = 3.0 * r * r * r * r / (n * (n + 2.0));
  CHECK(std::abs(mom2.mean() - e2) <= 4.0 * mom2.std_error());
  CHECK(std::abs(mom4.mean() - e4) <= 4.0 * mom4.std_error());
}
