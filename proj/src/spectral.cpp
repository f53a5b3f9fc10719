#include "fluctlab/spectral.hpp"

#include <cmath>
#include <numbers>

#include "fluctlab/parallel.hpp"

namespace fluctlab {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

KacState kac_init(const SphereSpec& spec, Rng& rng) {
  KacState s;
  s.x = sample_sphere(spec, rng);
  return s;
}

void kac_step(KacState& state, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(state.x.size());
  // Uniform unordered pair i < j.
  std::uint64_t i = rng.below(n);
  std::uint64_t j = rng.below(n - 1);
  if (j >= i) ++j;
  if (i > j) std::swap(i, j);
  const double theta = two_pi * rng.uniform();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double xi = state.x[i];
  const double xj = state.x[j];
  state.x[i] = c * xi - s * xj;
  state.x[j] = s * xi + c * xj;
  ++state.steps;
}

MeanErr kac_dirichlet(const Observable& f, const SphereSpec& spec, int samples, Rng& rng) {
  spec.validate();
  const auto n = static_cast<std::uint64_t>(spec.dimension);
  RunningStat stat;
  std::vector<double> x, rx;
  for (int s = 0; s < samples; ++s) {
    sample_sphere_into(x, spec, rng);
    std::uint64_t i = rng.below(n);
    std::uint64_t j = rng.below(n - 1);
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);
    const double theta = two_pi * rng.uniform();
    rx = x;
    rx[i] = std::cos(theta) * x[i] - std::sin(theta) * x[j];
    rx[j] = std::sin(theta) * x[i] + std::cos(theta) * x[j];
    const double d = f.value(SiteView(rx, 0)) - f.value(SiteView(x, 0));
    stat.add(d * d);
  }
  return MeanErr{stat.mean(), stat.std_error(), stat.count()};
}

namespace {

// (1/2pi) int [f(R^theta_{i,j} x) - f(x)]^2 dtheta by a uniform grid, exact
// for trigonometric polynomials of degree below the grid size.
double theta_average(const PolyObservable& f, std::vector<double>& scratch, int i, int j,
                     int grid) {
  const double fx = f.value(SiteView(scratch, 0));
  const double xi = scratch[static_cast<std::size_t>(i)];
  const double xj = scratch[static_cast<std::size_t>(j)];
  double sum = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double theta = two_pi * (g + 0.5) / grid;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    scratch[static_cast<std::size_t>(i)] = c * xi - s * xj;
    scratch[static_cast<std::size_t>(j)] = s * xi + c * xj;
    const double d = f.value(SiteView(scratch, 0)) - fx;
    sum += d * d;
  }
  scratch[static_cast<std::size_t>(i)] = xi;
  scratch[static_cast<std::size_t>(j)] = xj;
  return sum / grid;
}

int theta_grid_for(const PolyObservable& f) {
  // [f(R x) - f(x)]^2 is a trig polynomial of degree <= 2 deg(f).
  return std::max(8, 4 * f.poly().degree() + 4);
}

}  // namespace

MeanErr rotation_energy(const PolyObservable& f, int i, int j, const SphereSpec& spec, int samples,
                        Rng& rng) {
  spec.validate();
  const int grid = theta_grid_for(f);
  RunningStat stat;
  std::vector<double> x;
  for (int s = 0; s < samples; ++s) {
    sample_sphere_into(x, spec, rng);
    stat.add(theta_average(f, x, i, j, grid));
  }
  return MeanErr{stat.mean(), stat.std_error(), stat.count()};
}

PathLemmaResult path_lemma_check(const PolyObservable& f, int i, int k, const SphereSpec& spec,
                                 int samples, Rng& rng) {
  spec.validate();
  if (k < 2) throw std::invalid_argument("path_lemma_check: need k >= 2");
  if (i < 0 || i + k >= spec.dimension)
    throw std::invalid_argument("path_lemma_check: coordinates outside dimension");
  const int grid = theta_grid_for(f);

  RunningStat lhs_stat, rhs_stat, margin_stat;
  std::vector<double> x;
  for (int s = 0; s < samples; ++s) {
    sample_sphere_into(x, spec, rng);
    const double lhs = theta_average(f, x, i, i + k, grid);
    double rhs = 0.0;
    for (int j = 0; j < k; ++j) rhs += theta_average(f, x, i + j, i + j + 1, grid);
    rhs *= 64.0 * k;
    lhs_stat.add(lhs);
    rhs_stat.add(rhs);
    margin_stat.add(rhs - lhs);
  }
  PathLemmaResult r;
  r.lhs = lhs_stat.mean();
  r.lhs_se = lhs_stat.std_error();
  r.rhs = rhs_stat.mean();
  r.rhs_se = rhs_stat.std_error();
  r.margin = margin_stat.mean();
  r.margin_se = margin_stat.std_error();
  r.violation = r.margin < -4.0 * r.margin_se;
  return r;
}

RelaxationResult relaxation_time(const RelaxationSpec& spec) {
  RelaxationResult out;
  std::vector<double> log_n, log_tau, log_tau_sigma;

  for (int N : spec.N_list) {
    ModelParams params;
    params.n_sites = N;
    params.y = spec.y;
    params.coupling = spec.coupling;
    params.topology = Topology::periodic;

    IntegratorConfig cfg;
    cfg.dt_macro = spec.dt;
    cfg.accelerate = spec.accelerate;
    cfg.sweep = SweepOrder::even_odd;

    const double tau_guess = static_cast<double>(N) * static_cast<double>(N) / 40.0 + 0.5;
    const double run_time = spec.run_time_per_tau * tau_guess;
    const double obs_dt_target = std::max(spec.obs_spacing_per_tau * tau_guess, spec.dt);
    const int record_every = std::max(1, static_cast<int>(std::lround(obs_dt_target / spec.dt)));
    const double obs_dt = record_every * spec.dt;
    const long n_steps = std::lround(run_time / spec.dt);

    auto taus = run_replicas<double>(spec.replicas, spec.threads, [&](int rep) {
      Rng rng = Rng::substream(spec.seed + static_cast<std::uint64_t>(N) * 1000003ULL,
                               static_cast<std::uint64_t>(rep));
      VelocityField p = sample_equilibrium(params, rng);
      std::vector<double> series;
      series.reserve(static_cast<std::size_t>(n_steps / record_every) + 2);
      long step = 0;
      evolve_steps(p, n_steps, params, cfg, rng, [&](long s, const VelocityField& state) {
        if (s % record_every != 0) return;
        double probe = 0.0;
        switch (spec.probe) {
          case ProbeKind::energy_fourier_mode:
            for (int x = 0; x < N; ++x)
              probe += std::cos(two_pi * spec.mode * (x + 1) / static_cast<double>(N)) *
                       state.p[static_cast<std::size_t>(x)] * state.p[static_cast<std::size_t>(x)];
            break;
          case ProbeKind::site_energy: {
            const double v = state.p[0];
            const double e = 2.0 * total_energy(state) / N;
            probe = v * v - e;
            break;
          }
        }
        series.push_back(probe);
        ++step;
      });
      const TauResult t = integrated_autocorrelation(series, obs_dt);
      return std::max(t.tau_int, t.tau_exp);
    });

    const MeanErr m = mean_stderr(taus);
    out.N.push_back(N);
    out.tau.push_back(m.mean);
    out.tau_se.push_back(m.se);
    log_n.push_back(std::log(static_cast<double>(N)));
    log_tau.push_back(std::log(m.mean));
    log_tau_sigma.push_back(std::max(m.se / m.mean, 1e-3));
  }

  const LinFit fit = linear_fit_weighted(log_n, log_tau, log_tau_sigma);
  out.alpha = fit.slope;
  out.alpha_ci_low = fit.slope - 1.96 * fit.slope_se;
  out.alpha_ci_high = fit.slope + 1.96 * fit.slope_se;
  return out;
}

RelaxationResult kac_relaxation_time(const std::vector<int>& N_list, double radius_scale,
                                     long events_per_site, int replicas, std::uint64_t seed,
                                     int threads) {
  RelaxationResult out;
  std::vector<double> log_n, log_tau, log_tau_sigma;
  for (int N : N_list) {
    SphereSpec spec{N, radius_scale * std::sqrt(static_cast<double>(N))};
    const long n_events = events_per_site * N;
    const int record_every = std::max(1, N / 8);

    auto taus = run_replicas<double>(replicas, threads, [&](int rep) {
      Rng rng = Rng::substream(seed + static_cast<std::uint64_t>(N) * 7919ULL,
                               static_cast<std::uint64_t>(rep));
      KacState state = kac_init(spec, rng);
      const double r2_over_n = spec.radius * spec.radius / N;
      std::vector<double> series;
      series.reserve(static_cast<std::size_t>(n_events / record_every) + 1);
      for (long e = 0; e < n_events; ++e) {
        kac_step(state, rng);
        if (e % record_every == 0) series.push_back(state.x[0] * state.x[0] - r2_over_n);
      }
      const TauResult t = integrated_autocorrelation(series, static_cast<double>(record_every));
      return std::max(t.tau_int, t.tau_exp);  // in units of elementary events
    });

    const MeanErr m = mean_stderr(taus);
    out.N.push_back(N);
    out.tau.push_back(m.mean);
    out.tau_se.push_back(m.se);
    log_n.push_back(std::log(static_cast<double>(N)));
    log_tau.push_back(std::log(m.mean));
    log_tau_sigma.push_back(std::max(m.se / m.mean, 1e-3));
  }
  const LinFit fit = linear_fit_weighted(log_n, log_tau, log_tau_sigma);
  out.alpha = fit.slope;
  out.alpha_ci_low = fit.slope - 1.96 * fit.slope_se;
  out.alpha_ci_high = fit.slope + 1.96 * fit.slope_se;
  return out;
}

}  // namespace fluctlab
