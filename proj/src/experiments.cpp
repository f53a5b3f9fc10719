#include "fluctlab/experiments.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>

#include "fluctlab/parallel.hpp"
#include "fluctlab/report.hpp"
#include "fluctlab/spectral.hpp"

namespace fluctlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::uint64_t manifest_hash_for(const ExperimentConfig& cfg) {
  return fnv1a(cfg.canonical_echo() + "\ncode_version = " + kCodeVersion);
}

json make_manifest(const ExperimentConfig& cfg, double wall_seconds) {
  json m;
  m["experiment"] = cfg.experiment();
  m["config"] = cfg.canonical_echo();
  m["seed"] = cfg.get_u64("seed");
  m["code_version"] = kCodeVersion;
  m["manifest_hash"] = hex64(manifest_hash_for(cfg));
  m["wall_seconds"] = wall_seconds;
  return m;
}

struct Stage {
  std::string module;
  std::string operation;
};

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void run_simulate(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash, json& summary,
                  Stage& stage) {
  stage = {"dynamics", "evolve"};
  ModelParams params;
  params.n_sites = cfg.get_int("n_sites");
  params.y = cfg.get_double("y");
  params.coupling = Coupling::parse(cfg.get_str("coupling"));
  params.topology = cfg.get_str("topology") == "open" ? Topology::open : Topology::periodic;
  params.validate();

  IntegratorConfig icfg;
  icfg.dt_macro = cfg.get_double("dt_macro");
  icfg.accelerate = cfg.get_bool("accelerate");
  icfg.sweep = cfg.get_str("sweep") == "random_sequential" ? SweepOrder::random_sequential
                                                           : SweepOrder::even_odd;
  icfg.seed = cfg.get_u64("seed");

  std::vector<Observer> observers;
  observers.push_back({"energy", [](const VelocityField& p) { return total_energy(p); }});
  observers.push_back({"p0_sq", [](const VelocityField& p) { return p.p[0] * p.p[0]; }});
  const double y = params.y;
  if (params.topology == Topology::periodic) {
    for (int mode : cfg.get_int_list("modes")) {
      TestFunction H = TestFunction::fourier(mode);
      observers.push_back({"Y_mode" + std::to_string(mode),
                           [H, y](const VelocityField& p) { return field_eval(p, H, y); }});
    }
  }

  Rng rng(icfg.seed);
  VelocityField p0 = sample_equilibrium(params, rng);
  icfg.seed = rng.next_u64();
  Trajectory traj = evolve(std::move(p0), cfg.get_double("t_final"), params, icfg, observers,
                           cfg.get_int("record_every"));

  std::vector<std::string> cols{"time"};
  for (const auto& n : traj.names) cols.push_back(n);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::vector<double> row{traj.times[i]};
    for (const auto& v : traj.values) row.push_back(v[i]);
    rows.push_back(std::move(row));
  }
  write_table_csv(out.path("trajectory.csv"), cols, rows, hash);
  summary["initial_energy"] = traj.initial_energy;
  summary["max_energy_drift"] = traj.max_energy_drift;
  summary["samples"] = traj.times.size();
}

// ---------------------------------------------------------------------------
// diffusion-coefficient
// ---------------------------------------------------------------------------

void run_diffusion(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash,
                   json& summary, Stage& stage) {
  stage = {"variational", "minimize_diffusion_coefficient"};
  const double y = cfg.get_double("y");
  const Coupling a = Coupling::parse(cfg.get_str("coupling"));
  const int degree = cfg.get_int("basis_degree");
  const int halfwidth = cfg.get_int("basis_halfwidth");
  const auto basis = default_basis(degree, halfwidth);
  const DiffusionResult res = minimize_diffusion_coefficient(y, basis, a);

  json report;
  report["y"] = res.y;
  report["coupling"] = res.coupling;
  report["basis"] = {{"degree", degree}, {"halfwidth", halfwidth}, {"size", basis.size()},
                     {"labels", res.basis_labels}};
  report["a_hat"] = res.a_hat;
  report["form_value"] = res.form_value;
  report["coefficients"] = res.coefficients;
  report["gram_condition"] = res.gram_condition;
  report["dropped_columns"] = res.dropped_columns;
  report["bg_plug_scale"] = res.bg_plug_scale;
  report["manifest_hash"] = hex64(hash);
  write_json(out.path("diffusion.json"), report);
  summary["a_hat"] = res.a_hat;
}

// ---------------------------------------------------------------------------
// fluctuations: static field variance plus lag covariances with an OU fit
// ---------------------------------------------------------------------------

void run_fluctuations(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash,
                      json& summary, Stage& stage) {
  stage = {"fluctuation", "field_eval"};
  ModelParams params;
  params.n_sites = cfg.get_int("n_sites");
  params.y = cfg.get_double("y");
  params.coupling = Coupling::parse(cfg.get_str("coupling"));
  params.topology = Topology::periodic;
  params.validate();
  const int n = params.n_sites;
  const double y = params.y;
  const auto modes = cfg.get_int_list("modes");
  const std::uint64_t seed = cfg.get_u64("seed");
  const int threads = cfg.get_int("threads");

  // Static variance per mode from equilibrium samples.
  const int s_rep = cfg.get_int("static_replicas");
  const int s_samples = cfg.get_int("static_samples");
  json static_report = json::array();
  std::vector<std::vector<double>> static_rows;
  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    const TestFunction H = TestFunction::fourier(modes[mi]);
    auto vars = run_replicas<double>(s_rep, threads, [&](int rep) {
      Rng rng = Rng::substream(seed ^ 0xabcdefULL, static_cast<std::uint64_t>(rep) * modes.size() + mi);
      RunningStat stat;
      for (int s = 0; s < s_samples; ++s) {
        VelocityField p = sample_equilibrium(params, rng);
        const double v = field_eval(p, H, y);
        stat.add(v * v);
      }
      return stat.mean();
    });
    const MeanErr m = mean_stderr(vars);
    double h2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i + 1) / n;
      h2 += H.value(u) * H.value(u);
    }
    const double predicted = 2.0 * std::pow(y, 4) * h2 / n;
    static_rows.push_back({static_cast<double>(modes[mi]), m.mean, m.se, predicted});
    json rec;
    rec["mode"] = modes[mi];
    rec["variance"] = m.mean;
    rec["stderr"] = m.se;
    rec["predicted"] = predicted;
    rec["sigmas"] = m.se > 0 ? (m.mean - predicted) / m.se : 0.0;
    static_report.push_back(rec);
  }
  write_table_csv(out.path("static_variance.csv"), {"mode", "variance", "stderr", "predicted"},
                  static_rows, hash);

  // Lag covariance from accelerated equilibrium dynamics.
  stage = {"fluctuation", "empirical_time_covariance"};
  IntegratorConfig icfg;
  icfg.dt_macro = cfg.get_double("dt_macro");
  icfg.accelerate = true;
  const int record_every = cfg.get_int("record_every");
  const int replicas = cfg.get_int("replicas");
  const double t_final = cfg.get_double("t_final");
  const long n_steps = std::lround(t_final / icfg.dt_macro);
  const double grid_dt = record_every * icfg.dt_macro;
  const double a_hat = cfg.get_double("a_hat");

  std::vector<TestFunction> Hs;
  for (int mode : modes) Hs.push_back(TestFunction::fourier(mode));

  using Series = std::vector<std::vector<double>>;  // [mode][time]
  auto all = run_replicas<Series>(replicas, threads, [&](int rep) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(rep));
    VelocityField p = sample_equilibrium(params, rng);
    IntegratorConfig ic = icfg;
    Series series(modes.size());
    evolve_steps(p, n_steps, params, ic, rng, [&](long s, const VelocityField& state) {
      if (s % record_every != 0) return;
      for (std::size_t mi = 0; mi < Hs.size(); ++mi)
        series[mi].push_back(field_eval(state, Hs[mi], y));
    });
    return series;
  });

  json fits = json::array();
  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    std::vector<std::vector<double>> per_replica;
    per_replica.reserve(all.size());
    for (auto& s : all) per_replica.push_back(s[mi]);

    const double rate_guess = a_hat * std::pow(two_pi * modes[mi], 2);
    const int lag_count = cfg.get_int("lag_count");
    const double lag_max_time = 2.0 / rate_guess;  // out to ~ e^-2
    std::vector<int> lags;
    for (int l = 0; l < lag_count; ++l) {
      const int idx = static_cast<int>(std::lround(l * lag_max_time / (lag_count * grid_dt)));
      if (lags.empty() || idx > lags.back()) lags.push_back(idx);
    }
    StatSeries cov = empirical_time_covariance(per_replica, per_replica, lags, grid_dt);
    cov.label = "mode" + std::to_string(modes[mi]);
    cov.seed = seed;
    write_stat_series_csv(out.path("covariance_mode" + std::to_string(modes[mi]) + ".csv"), cov,
                          hash);

    const ExpDecayFit fit = fit_exponential_decay(cov, rate_guess);
    json rec;
    rec["mode"] = modes[mi];
    rec["rate"] = fit.rate;
    rec["rate_se"] = fit.rate_se;
    rec["amplitude"] = fit.amplitude;
    rec["amplitude_se"] = fit.amplitude_se;
    rec["predicted_rate"] = rate_guess;
    rec["predicted_amplitude"] = 2.0 * std::pow(y, 4);
    rec["fit_points"] = fit.points;
    fits.push_back(rec);
  }

  json report;
  report["static"] = static_report;
  report["ou_fits"] = fits;
  report["manifest_hash"] = hex64(hash);
  write_json(out.path("fluctuations.json"), report);
  summary["modes"] = modes;
}

// ---------------------------------------------------------------------------
// clt-variances
// ---------------------------------------------------------------------------

void run_clt(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash, json& summary,
             Stage& stage) {
  stage = {"fluctuation", "clt_time_variance"};
  CltSpec spec;
  spec.N = cfg.get_int("half_chain");
  spec.y = cfg.get_double("y");
  spec.coupling = Coupling::parse(cfg.get_str("coupling"));
  spec.t_total = cfg.get_double("t_total");
  spec.dt = cfg.get_double("dt");
  spec.replicas = cfg.get_int("replicas");
  spec.windows_per_replica = cfg.get_int("windows");
  spec.a_hat = cfg.get_double("a_hat");
  spec.seed = cfg.get_u64("seed");
  spec.threads = cfg.get_int("threads");

  const std::string target = cfg.get_str("target");
  if (target == "A") {
    spec.target = CltTarget::A;
  } else if (target == "B") {
    spec.target = CltTarget::B;
  } else if (target == "H") {
    spec.target = CltTarget::H;
  } else if (target == "combo") {
    spec.target = CltTarget::combo;
  } else {
    throw ConfigError("clt-variances: unsupported target '" + target + "'");
  }

  const std::string f_source = cfg.get_str("f_source");
  double bg_scale = 1.0;
  if (f_source == "zero") {
    spec.F = LocalFunction();
  } else if (f_source == "p0p1") {
    spec.F = LocalFunction::site(0) * LocalFunction::site(1);
  } else if (f_source == "minimizer") {
    const auto basis = default_basis(cfg.get_int("basis_degree"), cfg.get_int("basis_halfwidth"));
    const DiffusionResult res = minimize_diffusion_coefficient(spec.y, basis, spec.coupling);
    LocalFunction F;
    for (std::size_t i = 0; i < basis.size(); ++i) F += res.coefficients[i] * basis[i];
    bg_scale = res.bg_plug_scale;
    spec.F = bg_scale * F;
    spec.a_hat = res.a_hat;
  } else {
    throw ConfigError("clt-variances: unsupported f_source '" + f_source + "'");
  }

  StatSeries series = clt_time_variance(spec);
  series.label = target;
  write_stat_series_csv(out.path("clt_variance.csv"), series, hash);

  json report;
  report["target"] = target;
  report["half_chain"] = spec.N;
  report["estimate"] = series.estimate.back();
  report["stderr"] = series.std_error.back();
  report["normalized"] = series.estimate.back() / (2.0 * spec.N);
  report["a_hat"] = spec.a_hat;
  if (spec.coupling.is_constant() && (target == "B" || target == "A")) {
    const VarianceValue exact =
        gradient_type_variance(target == "B" ? VarianceTarget::BB : VarianceTarget::AB, spec.N,
                               spec.y, spec.coupling);
    report[target == "B" ? "exact_BB" : "exact_AB"] = exact.value;
  }
  report["manifest_hash"] = hex64(hash);
  write_json(out.path("clt.json"), report);
  summary["normalized"] = series.estimate.back() / (2.0 * spec.N);
}

// ---------------------------------------------------------------------------
// bg-residual
// ---------------------------------------------------------------------------

void run_bg(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash, json& summary,
            Stage& stage) {
  stage = {"variational", "minimize_diffusion_coefficient"};
  const double y = cfg.get_double("y");
  const Coupling coupling = Coupling::parse(cfg.get_str("coupling"));
  const auto basis = default_basis(cfg.get_int("basis_degree"), cfg.get_int("basis_halfwidth"));
  const DiffusionResult res = minimize_diffusion_coefficient(y, basis, coupling);
  LocalFunction f_min;
  for (std::size_t i = 0; i < basis.size(); ++i) f_min += res.coefficients[i] * basis[i];

  stage = {"fluctuation", "bg_residual"};
  BgSpec spec;
  spec.N = cfg.get_int("n_sites");
  spec.y = y;
  spec.coupling = coupling;
  spec.H = TestFunction::fourier(cfg.get_int("mode"));
  spec.T = cfg.get_double("t_final");
  spec.dt_macro = cfg.get_double("dt_macro");
  spec.replicas = cfg.get_int("replicas");
  spec.seed = cfg.get_u64("seed");
  spec.threads = cfg.get_int("threads");

  const LocalFunction f_plug = res.bg_plug_scale * f_min;
  const BgIntegrals raw = bg_residual_integrals(spec, {LocalFunction(), f_min, f_plug});

  const auto residual = [&](double b, std::size_t f_index) {
    RunningStat stat;
    for (std::size_t r = 0; r < raw.current_term.size(); ++r) {
      const double i_val =
          raw.current_term[r] + b * raw.gradient_term[r] - raw.dissipative[f_index][r];
      stat.add(i_val * i_val);
    }
    return MeanErr{stat.mean(), stat.std_error(), stat.count()};
  };

  const MeanErr r0 = residual(res.a_hat, 0);
  const MeanErr r1 = residual(res.a_hat, 1);
  const MeanErr r2 = residual(res.a_hat, 2);

  // Paired comparison F = 0 vs the plugged minimizer on the same trajectories.
  RunningStat paired;
  for (std::size_t r = 0; r < raw.current_term.size(); ++r) {
    const double i0 = raw.current_term[r] + res.a_hat * raw.gradient_term[r] - raw.dissipative[0][r];
    const double i2 = raw.current_term[r] + res.a_hat * raw.gradient_term[r] - raw.dissipative[2][r];
    paired.add(i0 * i0 - i2 * i2);
  }

  // Coefficient scan with the plugged minimizer.
  const double halfwidth = cfg.get_double("scan_halfwidth");
  const double step = cfg.get_double("scan_step");
  StatSeries scan;
  scan.grid_name = "a_hat";
  scan.replicas = spec.replicas;
  scan.seed = spec.seed;
  const int half_pts = static_cast<int>(std::lround(halfwidth / step));
  double best_b = res.a_hat;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = -half_pts; k <= half_pts; ++k) {
    const double b = res.a_hat + k * step;
    const MeanErr m = residual(b, 2);
    scan.grid.push_back(b);
    scan.estimate.push_back(m.mean);
    scan.std_error.push_back(m.se);
    if (m.mean < best_val) {
      best_val = m.mean;
      best_b = b;
    }
  }
  write_stat_series_csv(out.path("residual_scan.csv"), scan, hash);

  json report;
  report["a_hat_variational"] = res.a_hat;
  report["residual_F0"] = {{"estimate", r0.mean}, {"stderr", r0.se}};
  report["residual_Fmin"] = {{"estimate", r1.mean}, {"stderr", r1.se}};
  report["residual_Fplug"] = {{"estimate", r2.mean}, {"stderr", r2.se}};
  report["paired_drop"] = {{"estimate", paired.mean()}, {"stderr", paired.std_error()}};
  report["paired_sigmas"] = paired.std_error() > 0 ? paired.mean() / paired.std_error() : 0.0;
  report["scan_argmin"] = best_b;
  report["scan_step"] = step;
  report["scan_matches_variational"] = std::abs(best_b - res.a_hat) <= step + 1e-12;
  report["manifest_hash"] = hex64(hash);
  write_json(out.path("bg.json"), report);
  summary["paired_sigmas"] = report["paired_sigmas"];
  summary["scan_argmin"] = best_b;
}

// ---------------------------------------------------------------------------
// sphere-checks
// ---------------------------------------------------------------------------

LocalFunction random_polynomial(Rng& rng, int lo, int hi, int max_degree, int n_terms) {
  LocalFunction f;
  for (int t = 0; t < n_terms; ++t) {
    Monomial m;
    int degree_left = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_degree)));
    while (degree_left > 0) {
      const int site = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
      const int e = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(degree_left)));
      m.emplace_back(site, e);
      degree_left -= e;
    }
    f += LocalFunction::monomial(m, rng.uniform_sym());
  }
  return f;
}

void run_sphere_checks(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash,
                       json& summary, Stage& stage) {
  stage = {"sphere_lab", "moment_closed_form"};
  const double y = cfg.get_double("y");
  const int samples = cfg.get_int("mc_samples");
  const std::uint64_t seed = cfg.get_u64("seed");
  json records = json::array();
  bool all_pass = true;

  const auto push = [&](const std::string& check, const json& params, double lhs, double rhs,
                        double se, bool pass) {
    json rec;
    rec["check"] = check;
    rec["params"] = params;
    rec["lhs"] = lhs;
    rec["rhs"] = rhs;
    rec["stderr"] = se;
    rec["verdict"] = pass ? "pass" : "fail";
    records.push_back(rec);
    all_pass = all_pass && pass;
  };

  // Closed-form moments against Monte Carlo, canonical exponent partitions.
  const int max_half = cfg.get_int("max_half_degree");
  const int n_max = cfg.get_int("n_max");
  Rng rng(seed);
  for (int n = 2; n <= n_max; ++n) {
    SphereSpec spec{n, y * std::sqrt(static_cast<double>(n))};
    // All partitions of total half-degree <= max_half into <= n parts.
    std::vector<std::vector<int>> parts;
    std::vector<int> cur;
    const std::function<void(int, int)> gen = [&](int remaining, int max_part) {
      if (!cur.empty()) parts.push_back(cur);
      for (int p = std::min(remaining, max_part); p >= 1; --p) {
        if (static_cast<int>(cur.size()) >= n) break;
        cur.push_back(p);
        gen(remaining - p, p);
        cur.pop_back();
      }
    };
    gen(max_half, max_half);

    // One shared sample batch per dimension.
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(samples));
    for (auto& pt : pts) pt = sample_sphere(spec, rng);
    for (const auto& part : parts) {
      RunningStat stat;
      for (const auto& pt : pts) {
        double v = 1.0;
        for (std::size_t k = 0; k < part.size(); ++k) {
          const double x2 = pt[k] * pt[k];
          for (int e = 0; e < part[k]; ++e) v *= x2;
        }
        stat.add(v);
      }
      const SphereMoment m = moment_closed_form(part, spec);
      const double sigma = stat.std_error();
      const double z = sigma > 0 ? (stat.mean() - m.normalized_expectation) / sigma : 0.0;
      push("moment_closed_form_vs_mc", {{"n", n}, {"exponents", part}},
           m.normalized_expectation, stat.mean(), sigma, std::abs(z) <= 4.0);
    }
  }

  // Nearest-neighbor pair-correlation identity, exact closed forms.
  stage = {"sphere_lab", "spheres_identity"};
  const int id_n_max = cfg.get_int("spheres_identity_n_max");
  for (int N = 1; N <= id_n_max; ++N) {
    const int n = 2 * N + 1;
    SphereSpec spec{n, y * std::sqrt(static_cast<double>(n))};
    double sum = 0.0;
    for (int i = 0; i < 2 * N; ++i) {
      std::vector<int> exps(static_cast<std::size_t>(i), 0);
      exps.push_back(1);
      exps.push_back(1);
      sum += moment_closed_form(exps, spec).normalized_expectation;
    }
    const double predicted = 2.0 * N * (2.0 * N + 1.0) * std::pow(y, 4) / (2.0 * N + 3.0);
    push("pair_correlation_identity", {{"N", N}}, sum, predicted, 0.0,
         std::abs(sum - predicted) <= 1e-12 * std::abs(predicted));
  }

  // Divergence-theorem spot checks.
  stage = {"sphere_lab", "divergence_check"};
  {
    const int nd = cfg.get_int("divergence_dim");
    SphereSpec spec{nd, 1.2};
    PolyObservable unit(LocalFunction::constant(1.0));
    CheckResult r = divergence_check(unit, 0, spec, samples / 4, rng);
    push("divergence_constant", {{"n", nd}}, r.lhs, r.rhs, std::hypot(r.lhs_se, r.rhs_se),
         r.pass());
    PolyObservable coord(LocalFunction::site(1));
    r = divergence_check(coord, 1, spec, samples / 4, rng);
    push("divergence_coordinate", {{"n", nd}}, r.lhs, r.rhs, std::hypot(r.lhs_se, r.rhs_se),
         r.pass());
    PolyObservable poly(random_polynomial(rng, 0, nd - 1, 3, 5));
    r = divergence_check(poly, 2, spec, samples / 2, rng);
    push("divergence_random_poly", {{"n", nd}}, r.lhs, r.rhs, std::hypot(r.lhs_se, r.rhs_se),
         r.pass());
  }

  // Telescoping identity: integrals agree, integrands do not.
  stage = {"sphere_lab", "telescoping_check"};
  {
    const int nt = cfg.get_int("telescoping_dim");
    SphereSpec spec{nt, y * std::sqrt(static_cast<double>(nt))};
    const int n_polys = cfg.get_int("telescoping_polys");
    for (int t = 0; t < n_polys; ++t) {
      PolyObservable poly(random_polynomial(rng, 0, nt - 1, 3, 4));
      const int i = 0 + static_cast<int>(rng.below(2));
      const int j = i + 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(nt - i - 2)));
      CheckResult r = telescoping_check(poly, i, j, spec, samples / 2, rng);
      const bool pass = r.pass() && (r.max_pointwise_gap > 1e-9 || poly.poly().degree() < 2);
      push("telescoping",
           {{"n", nt}, {"i", i}, {"j", j}, {"pointwise_gap", r.max_pointwise_gap}}, r.lhs, r.rhs,
           std::hypot(r.lhs_se, r.rhs_se), pass);
    }
  }

  json report;
  report["records"] = records;
  report["all_pass"] = all_pass;
  report["manifest_hash"] = hex64(hash);
  write_json(out.path("sphere_checks.json"), report);
  summary["all_pass"] = all_pass;
}

// ---------------------------------------------------------------------------
// spectral-gap
// ---------------------------------------------------------------------------

void run_spectral(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash, json& summary,
                  Stage& stage) {
  stage = {"spectral", "relaxation_time"};
  RelaxationSpec spec;
  spec.N_list = cfg.get_int_list("n_list");
  spec.y = cfg.get_double("y");
  spec.coupling = Coupling::parse(cfg.get_str("coupling"));
  spec.dt = cfg.get_double("dt");
  spec.run_time_per_tau = cfg.get_double("run_time_per_tau");
  spec.obs_spacing_per_tau = cfg.get_double("obs_spacing_per_tau");
  spec.replicas = cfg.get_int("replicas");
  spec.mode = cfg.get_int("mode");
  spec.seed = cfg.get_u64("seed");
  spec.threads = cfg.get_int("threads");

  const RelaxationResult res = relaxation_time(spec);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < res.N.size(); ++i)
    rows.push_back({static_cast<double>(res.N[i]), static_cast<double>(spec.mode), res.tau[i],
                    res.tau_se[i]});
  write_table_csv(out.path("scaling.csv"), {"N", "probe_mode", "tau", "stderr"}, rows, hash);

  json fit;
  fit["alpha"] = res.alpha;
  fit["ci_low"] = res.alpha_ci_low;
  fit["ci_high"] = res.alpha_ci_high;
  fit["manifest_hash"] = hex64(hash);
  write_json(out.path("fit.json"), fit);
  summary["alpha"] = res.alpha;
}

// ---------------------------------------------------------------------------
// ensemble-gap
// ---------------------------------------------------------------------------

void run_ensemble(const ExperimentConfig& cfg, OutputStage& out, std::uint64_t hash, json& summary,
                  Stage& stage) {
  stage = {"sphere_lab", "ensemble_gap"};
  const double y = cfg.get_double("y");
  const auto n_list = cfg.get_int_list("n_list");

  struct Probe {
    std::string name;
    LocalFunction g;
  };
  std::vector<Probe> probes;
  probes.push_back({"p1^4", LocalFunction::site(0, 4)});
  probes.push_back({"p1^2*p2^2", LocalFunction::site(0, 2) * LocalFunction::site(1, 2)});

  json report;
  report["probes"] = json::array();
  std::vector<std::vector<double>> rows;
  for (const auto& probe : probes) {
    std::vector<double> log_n, log_gap;
    for (int N : n_list) {
      const EnsembleGap g = ensemble_gap(probe.g, N, y);
      rows.push_back({static_cast<double>(N), g.sphere_value, g.gaussian_value, g.scaled_gap});
      log_n.push_back(std::log(static_cast<double>(N)));
      log_gap.push_back(std::log(std::max(g.scaled_gap, 1e-300)));
    }
    const LinFit fit = linear_fit(log_n, log_gap);
    json rec;
    rec["observable"] = probe.name;
    rec["slope"] = fit.slope;
    rec["bounded"] = std::abs(fit.slope) <= 0.1;
    report["probes"].push_back(rec);
  }
  write_table_csv(out.path("ensemble_gap.csv"), {"N", "sphere", "gaussian", "scaled_gap"}, rows,
                  hash);
  report["manifest_hash"] = hex64(hash);
  write_json(out.path("ensemble.json"), report);
  summary["probes"] = report["probes"];
}

}  // namespace

std::filesystem::path experiment_out_dir(const ExperimentConfig& config) {
  const std::string dir = config.get_str("out_dir");
  if (!dir.empty()) return dir;
  return fs::path("fluctlab-out") / config.experiment();
}

ExpDecayFit fit_exponential_decay(const StatSeries& series, double rate_guess) {
  std::vector<double> x, ly, sigma;
  for (std::size_t i = 0; i < series.grid.size(); ++i) {
    const double predicted_ratio = std::exp(-rate_guess * series.grid[i]);
    if (predicted_ratio < 0.15 || predicted_ratio > 0.95) continue;
    if (series.estimate[i] <= 0.0) continue;
    x.push_back(series.grid[i]);
    ly.push_back(std::log(series.estimate[i]));
    sigma.push_back(std::max(series.std_error[i] / series.estimate[i], 1e-9));
  }
  if (x.size() < 3) throw std::runtime_error("fit_exponential_decay: too few usable lags");
  const LinFit f = linear_fit_weighted(x, ly, sigma);
  ExpDecayFit out;
  out.rate = -f.slope;
  out.rate_se = f.slope_se;
  out.amplitude = std::exp(f.intercept);
  out.amplitude_se = out.amplitude * f.intercept_se;
  out.points = static_cast<int>(x.size());
  return out;
}

int run_experiment(const ExperimentConfig& config) {
  Stage stage{"cli", "run_experiment"};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::uint64_t hash = manifest_hash_for(config);
    OutputStage out(experiment_out_dir(config));
    json summary;

    const std::string& kind = config.experiment();
    if (kind == "simulate") {
      run_simulate(config, out, hash, summary, stage);
    } else if (kind == "diffusion-coefficient") {
      run_diffusion(config, out, hash, summary, stage);
    } else if (kind == "fluctuations") {
      run_fluctuations(config, out, hash, summary, stage);
    } else if (kind == "clt-variances") {
      run_clt(config, out, hash, summary, stage);
    } else if (kind == "bg-residual") {
      run_bg(config, out, hash, summary, stage);
    } else if (kind == "sphere-checks") {
      run_sphere_checks(config, out, hash, summary, stage);
    } else if (kind == "spectral-gap") {
      run_spectral(config, out, hash, summary, stage);
    } else if (kind == "ensemble-gap") {
      run_ensemble(config, out, hash, summary, stage);
    } else {
      throw ConfigError("unknown experiment '" + kind + "'");
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = make_manifest(config, wall);
    manifest["summary"] = summary;
    write_json(out.path("manifest.json"), manifest);
    out.publish();
    std::cout << json{{"status", "ok"},
                      {"experiment", config.experiment()},
                      {"out_dir", experiment_out_dir(config).string()},
                      {"summary", summary}}
                     .dump()
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cout << json{{"status", "error"},
                      {"error", e.what()},
                      {"module", stage.module},
                      {"operation", stage.operation}}
                     .dump()
              << "\n";
    return 1;
  }
}

}  // namespace fluctlab
