#include "fluctlab/fluctuation.hpp"

#include <cmath>
#include <numbers>

#include "fluctlab/parallel.hpp"
#include "fluctlab/sphere.hpp"

namespace fluctlab {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

TestFunction TestFunction::fourier(int mode, double phase) {
  TestFunction h;
  h.kind_ = Kind::fourier;
  h.mode_ = std::abs(mode);
  h.phase_ = phase;
  h.amplitude_ = mode == 0 ? 1.0 : std::sqrt(2.0);
  return h;
}

TestFunction TestFunction::constant(double value) {
  TestFunction h;
  h.kind_ = Kind::fourier;
  h.mode_ = 0;
  h.phase_ = 0.0;
  h.amplitude_ = value;
  return h;
}

TestFunction TestFunction::tabulated(std::vector<double> values) {
  if (values.size() < 4) throw std::invalid_argument("test function: need at least 4 grid values");
  TestFunction h;
  h.kind_ = Kind::tabulated;
  const auto n = static_cast<int>(values.size());
  h.max_mode_ = (n - 1) / 2;  // keep it interpolatory and alias-free
  h.spectrum_.resize(static_cast<std::size_t>(2 * h.max_mode_ + 1));
  for (int k = -h.max_mode_; k <= h.max_mode_; ++k) {
    std::complex<double> c{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i + 1) / n;
      c += values[static_cast<std::size_t>(i)] *
           std::exp(std::complex<double>(0.0, -two_pi * k * u));
    }
    h.spectrum_[static_cast<std::size_t>(k + h.max_mode_)] = c / static_cast<double>(n);
  }
  return h;
}

double TestFunction::value(double u) const {
  if (kind_ == Kind::fourier) {
    if (mode_ == 0) return amplitude_;
    return amplitude_ * std::cos(two_pi * mode_ * u + phase_);
  }
  std::complex<double> s{0.0, 0.0};
  for (int k = -max_mode_; k <= max_mode_; ++k)
    s += spectrum_[static_cast<std::size_t>(k + max_mode_)] *
         std::exp(std::complex<double>(0.0, two_pi * k * u));
  return s.real();
}

double TestFunction::deriv(double u) const {
  if (kind_ == Kind::fourier) {
    if (mode_ == 0) return 0.0;
    return -amplitude_ * two_pi * mode_ * std::sin(two_pi * mode_ * u + phase_);
  }
  std::complex<double> s{0.0, 0.0};
  for (int k = -max_mode_; k <= max_mode_; ++k)
    s += spectrum_[static_cast<std::size_t>(k + max_mode_)] *
         std::complex<double>(0.0, two_pi * k) *
         std::exp(std::complex<double>(0.0, two_pi * k * u));
  return s.real();
}

double TestFunction::deriv2(double u) const {
  if (kind_ == Kind::fourier) {
    if (mode_ == 0) return 0.0;
    const double w = two_pi * mode_;
    return -amplitude_ * w * w * std::cos(w * u + phase_);
  }
  std::complex<double> s{0.0, 0.0};
  for (int k = -max_mode_; k <= max_mode_; ++k) {
    const double w = two_pi * k;
    s -= spectrum_[static_cast<std::size_t>(k + max_mode_)] * (w * w) *
         std::exp(std::complex<double>(0.0, two_pi * k * u));
  }
  return s.real();
}

std::vector<std::complex<double>> TestFunction::fourier_coeffs(int max_mode) const {
  std::vector<std::complex<double>> c(static_cast<std::size_t>(2 * max_mode + 1), {0.0, 0.0});
  if (kind_ == Kind::fourier) {
    if (mode_ == 0) {
      c[static_cast<std::size_t>(max_mode)] = amplitude_;
    } else if (mode_ <= max_mode) {
      // A cos(2 pi m u + phi) = A/2 e^{i phi} e^{2 pi i m u} + c.c.
      const std::complex<double> half =
          0.5 * amplitude_ * std::exp(std::complex<double>(0.0, phase_));
      c[static_cast<std::size_t>(max_mode + mode_)] = half;
      c[static_cast<std::size_t>(max_mode - mode_)] = std::conj(half);
    }
    return c;
  }
  for (int k = -std::min(max_mode, max_mode_); k <= std::min(max_mode, max_mode_); ++k)
    c[static_cast<std::size_t>(k + max_mode)] = spectrum_[static_cast<std::size_t>(k + max_mode_)];
  return c;
}

std::string TestFunction::describe() const {
  if (kind_ == Kind::fourier) {
    if (mode_ == 0) return "constant:" + std::to_string(amplitude_);
    return "fourier:" + std::to_string(mode_) + ":" + std::to_string(phase_);
  }
  return "tabulated:" + std::to_string(2 * max_mode_ + 1);
}

double field_eval(const VelocityField& p, const TestFunction& H, double y) {
  if (p.topology != Topology::periodic)
    throw std::invalid_argument("field_eval: the fluctuation field lives on the torus");
  const int n = p.size();
  const double y2 = y * y;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i + 1) / n;
    const double v = p.p[static_cast<std::size_t>(i)];
    sum += H.value(u) * (v * v - y2);
  }
  return sum / std::sqrt(static_cast<double>(n));
}

double ou_covariance_predict(const TestFunction& H1, const TestFunction& H2, double lag, double y,
                             double a_hat) {
  if (lag < 0.0) throw std::invalid_argument("ou_covariance_predict: negative lag");
  if (!(a_hat > 0.0)) throw std::invalid_argument("ou_covariance_predict: a_hat must be positive");
  const double y4 = y * y * y * y;

  if (H1.is_fourier() && H2.is_fourier()) {
    if (H1.mode() != H2.mode()) {
      if (H1.mode() == 0 || H2.mode() == 0) {
        // <S_t H1, H2> keeps only the shared mean component, which is zero
        // unless both are constants.
        return 0.0;
      }
      return 0.0;
    }
    const int m = H1.mode();
    if (m == 0) return 2.0 * y4 * H1.value(0.3) * H2.value(0.3);
    const double w = two_pi * m;
    return 2.0 * y4 * std::cos(H1.phase() - H2.phase()) *
           std::exp(-a_hat * w * w * lag);
  }

  const int K = 64;
  const auto c1 = H1.fourier_coeffs(K);
  const auto c2 = H2.fourier_coeffs(K);
  std::complex<double> sum{0.0, 0.0};
  for (int k = -K; k <= K; ++k) {
    const double w = two_pi * k;
    sum += c1[static_cast<std::size_t>(k + K)] * std::conj(c2[static_cast<std::size_t>(k + K)]) *
           std::exp(-a_hat * w * w * lag);
  }
  return 2.0 * y4 * sum.real();
}

StatSeries empirical_time_covariance(const std::vector<std::vector<double>>& series1,
                                     const std::vector<std::vector<double>>& series2,
                                     const std::vector<int>& lag_indices, double grid_dt) {
  const auto n_rep = series1.size();
  if (n_rep != series2.size())
    throw std::invalid_argument("empirical_time_covariance: replica count mismatch");
  if (n_rep < 8)
    throw std::invalid_argument(
        "empirical_time_covariance: need at least 8 replicas for error bars");

  StatSeries out;
  out.grid_name = "lag";
  out.replicas = static_cast<int>(n_rep);
  for (int lag : lag_indices) {
    RunningStat per_replica;
    for (std::size_t r = 0; r < n_rep; ++r) {
      const auto& a = series1[r];
      const auto& b = series2[r];
      if (a.size() != b.size()) throw std::invalid_argument("empirical_time_covariance: ragged series");
      if (lag < 0 || static_cast<std::size_t>(lag) >= a.size())
        throw std::invalid_argument("empirical_time_covariance: lag beyond series");
      double s = 0.0;
      const std::size_t m = a.size() - static_cast<std::size_t>(lag);
      for (std::size_t t = 0; t < m; ++t) s += a[t] * b[t + static_cast<std::size_t>(lag)];
      per_replica.add(s / static_cast<double>(m));
    }
    out.grid.push_back(lag * grid_dt);
    out.estimate.push_back(per_replica.mean());
    out.std_error.push_back(per_replica.std_error());
  }
  return out;
}

namespace {

// Bond-local symbolic pieces of (L tau^x F): for each bond offset z in the
// support of F, the polynomials X_z F and X_z^2 F; then
//   (L F)(p) = sum_z 1/2 [ a(p_z, p_{z+1}) (X_z^2 F)(p) + (X_z a)(p) (X_z F)(p) ].
struct GeneratorPieces {
  struct BondPiece {
    int z;
    LocalFunction xf;
    LocalFunction xxf;
  };
  std::vector<BondPiece> bonds;

  explicit GeneratorPieces(const LocalFunction& F) {
    if (F.empty() || F.degree() == 0) return;
    const int lo = F.lo_site();
    const int hi = F.hi_site();
    for (int z = lo - 1; z <= hi; ++z) {
      BondPiece piece;
      piece.z = z;
      piece.xf = F.angular_derivative(z, z + 1);
      if (piece.xf.empty()) continue;
      piece.xxf = piece.xf.angular_derivative(z, z + 1);
      bonds.push_back(std::move(piece));
    }
  }

  // Evaluate (L tau^x F)(p) on a periodic field.
  double eval(const VelocityField& p, int x, const Coupling& a) const {
    SiteView base(p);
    double sum = 0.0;
    for (const auto& piece : bonds) {
      SiteView view = base.shifted(x);
      const double pz = view[piece.z];
      const double pz1 = view[piece.z + 1];
      const double av = a(pz, pz1);
      const double xa = pz1 * a.dr(pz, pz1) - pz * a.ds(pz, pz1);
      sum += 0.5 * (av * piece.xxf.eval(view) + xa * piece.xf.eval(view));
    }
    return sum;
  }
};

}  // namespace

namespace {

struct CltReplicaOut {
  std::vector<double> isq_over_t;  // one per checkpoint, averaged over windows
};

std::vector<CltReplicaOut> clt_run(const CltSpec& spec, const std::vector<double>& fractions) {
  if (spec.N < 1) throw std::invalid_argument("clt_time_variance: N must be >= 1");
  const int N = spec.N;
  const int n = 2 * N + 1;

  ModelParams params;
  params.n_sites = n;
  params.y = spec.y;
  params.coupling = spec.coupling;
  params.topology = Topology::open;

  IntegratorConfig cfg;
  cfg.dt_macro = spec.dt;
  cfg.accelerate = false;
  cfg.sweep = SweepOrder::even_odd;

  // psi_F = sum of translates inside the chain; V_H = L psi_F evaluated per
  // bond. Site s of the chain maps to array index s + N.
  const bool needs_F = spec.target == CltTarget::H || spec.target == CltTarget::combo;
  LocalFunction psi;
  std::vector<std::pair<int, std::pair<LocalFunction, LocalFunction>>> psi_bonds;
  if (needs_F) {
    psi = chain_translate_sum(spec.F, N).translated(N);  // shift sites -N..N to 0..2N
    for (int b = 0; b < n - 1; ++b) {
      LocalFunction xf = psi.angular_derivative(b, b + 1);
      if (xf.empty()) continue;
      LocalFunction xxf = xf.angular_derivative(b, b + 1);
      psi_bonds.emplace_back(b, std::make_pair(std::move(xf), std::move(xxf)));
    }
  }

  const auto eval_V = [&](const VelocityField& p) {
    double v = 0.0;
    const SiteView view(p);
    const auto current_sum = [&]() {
      double s = 0.0;
      for (int b = 0; b < n - 1; ++b)
        s += current_pair(p.p[static_cast<std::size_t>(b)], p.p[static_cast<std::size_t>(b + 1)],
                          spec.coupling);
      return s;
    };
    const auto boundary_diff = [&]() {
      const double pn = p.p[static_cast<std::size_t>(n - 1)];
      const double pm = p.p[0];
      return pn * pn - pm * pm;
    };
    const auto dissipative = [&]() {
      double s = 0.0;
      for (const auto& [b, piece] : psi_bonds) {
        const double pz = p.p[static_cast<std::size_t>(b)];
        const double pz1 = p.p[static_cast<std::size_t>(b + 1)];
        const double av = spec.coupling(pz, pz1);
        const double xa = pz1 * spec.coupling.dr(pz, pz1) - pz * spec.coupling.ds(pz, pz1);
        s += 0.5 * (av * piece.second.eval(view) + xa * piece.first.eval(view));
      }
      return s;
    };
    switch (spec.target) {
      case CltTarget::A: v = boundary_diff(); break;
      case CltTarget::B: v = current_sum(); break;
      case CltTarget::H: v = dissipative(); break;
      case CltTarget::combo:
        v = current_sum() + spec.a_hat * boundary_diff() - dissipative();
        break;
    }
    return v;
  };

  const long steps_per_window = std::lround(spec.t_total / spec.dt);
  std::vector<long> checkpoints;
  for (double f : fractions) checkpoints.push_back(std::lround(f * static_cast<double>(steps_per_window)));

  using ReplicaOut = CltReplicaOut;
  return run_replicas<ReplicaOut>(spec.replicas, spec.threads, [&, fractions](int rep) {
    Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(rep));
    SphereSpec sphere{n, spec.y * std::sqrt(static_cast<double>(n))};
    VelocityField p;
    p.topology = Topology::open;
    p.p = sample_sphere(sphere, rng);

    IntegratorConfig cfg_rep = cfg;
    cfg_rep.seed = 0;  // rng passed explicitly below

    ReplicaOut out;
    out.isq_over_t.assign(fractions.size(), 0.0);
    double integral = 0.0;
    double prev = eval_V(p);
    const double dt = spec.dt;
    for (int w = 0; w < spec.windows_per_replica; ++w) {
      integral = 0.0;
      prev = eval_V(p);
      std::size_t next_cp = 0;
      for (long s = 1; s <= steps_per_window; ++s) {
        sweep_step(p, params, cfg_rep, dt, rng);
        const double cur = eval_V(p);
        integral += 0.5 * dt * (prev + cur);
        prev = cur;
        while (next_cp < checkpoints.size() && s == checkpoints[next_cp]) {
          const double t = static_cast<double>(s) * dt;
          out.isq_over_t[next_cp] += integral * integral / t;
          ++next_cp;
        }
      }
    }
    for (auto& v : out.isq_over_t) v /= static_cast<double>(spec.windows_per_replica);
    return out;
  });
}

}  // namespace

StatSeries clt_time_variance(const CltSpec& spec) {
  if (spec.replicas < 2) throw std::invalid_argument("clt_time_variance: need >= 2 replicas");
  const std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
  const auto runs = clt_run(spec, fractions);

  StatSeries series;
  series.grid_name = "t";
  series.replicas = spec.replicas;
  series.seed = spec.seed;
  for (std::size_t c = 0; c < fractions.size(); ++c) {
    RunningStat stat;
    for (const auto& r : runs) stat.add(r.isq_over_t[c]);
    series.grid.push_back(fractions[c] * spec.t_total);
    series.estimate.push_back(stat.mean());
    series.std_error.push_back(stat.std_error());
  }
  return series;
}

std::vector<double> clt_time_variance_samples(const CltSpec& spec) {
  const auto runs = clt_run(spec, {1.0});
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.isq_over_t[0]);
  return out;
}

BgIntegrals bg_residual_integrals(const BgSpec& spec, const std::vector<LocalFunction>& Fs) {
  if (spec.N < 3) throw std::invalid_argument("bg_residual: N must be >= 3");
  const int n = spec.N;

  ModelParams params;
  params.n_sites = n;
  params.y = spec.y;
  params.coupling = spec.coupling;
  params.topology = Topology::periodic;

  IntegratorConfig cfg;
  cfg.dt_macro = spec.dt_macro;
  cfg.accelerate = true;
  cfg.sweep = SweepOrder::even_odd;

  // Discrete gradient weights grad_N H(x/N) = N [H((x+1)/N) - H(x/N)]; site i
  // maps to u = (i+1)/N.
  std::vector<double> gradH(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i + 1) / n;
    const double u1 = static_cast<double>(i + 2) / n;
    gradH[static_cast<std::size_t>(i)] = n * (spec.H.value(u1) - spec.H.value(u));
  }
  const double root_n = std::sqrt(static_cast<double>(n));

  std::vector<GeneratorPieces> pieces;
  pieces.reserve(Fs.size());
  for (const auto& F : Fs) pieces.emplace_back(F);

  const long n_steps = std::lround(spec.T / spec.dt_macro);
  const double dt = spec.dt_macro;

  struct ReplicaOut {
    double cur = 0.0, grad = 0.0;
    std::vector<double> diss;
  };

  auto runs = run_replicas<ReplicaOut>(spec.replicas, spec.threads, [&](int rep) {
    Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(rep));
    VelocityField p = sample_equilibrium(params, rng);

    const auto eval_terms = [&](const VelocityField& state, double* cur, double* grad,
                                std::vector<double>& diss) {
      double c_sum = 0.0, g_sum = 0.0;
      for (int x = 0; x < n; ++x) {
        const double w = gradH[static_cast<std::size_t>(x)];
        const double px = state.p[static_cast<std::size_t>(x)];
        const double ps = state.p[static_cast<std::size_t>((x + 1) % n)];
        c_sum += w * current_pair(px, ps, spec.coupling);
        g_sum += w * (ps * ps - px * px);
      }
      *cur = root_n * c_sum;
      *grad = root_n * g_sum;
      for (std::size_t f = 0; f < pieces.size(); ++f) {
        double d_sum = 0.0;
        for (int x = 0; x < n; ++x) {
          const double w = gradH[static_cast<std::size_t>(x)];
          if (w == 0.0) continue;
          d_sum += w * pieces[f].eval(state, x, spec.coupling);
        }
        diss[f] = root_n * d_sum;
      }
    };

    ReplicaOut out;
    out.diss.assign(Fs.size(), 0.0);
    double prev_cur, prev_grad;
    std::vector<double> prev_diss(Fs.size(), 0.0), cur_diss(Fs.size(), 0.0);
    eval_terms(p, &prev_cur, &prev_grad, prev_diss);

    Rng dyn_rng = rng;
    for (long s = 1; s <= n_steps; ++s) {
      sweep_step(p, params, cfg, cfg.dt_micro(n), dyn_rng);
      double c, g;
      eval_terms(p, &c, &g, cur_diss);
      out.cur += 0.5 * dt * (prev_cur + c);
      out.grad += 0.5 * dt * (prev_grad + g);
      for (std::size_t f = 0; f < Fs.size(); ++f)
        out.diss[f] += 0.5 * dt * (prev_diss[f] + cur_diss[f]);
      prev_cur = c;
      prev_grad = g;
      std::swap(prev_diss, cur_diss);
    }
    return out;
  });

  BgIntegrals out;
  out.current_term.reserve(runs.size());
  out.gradient_term.reserve(runs.size());
  out.dissipative.assign(Fs.size(), {});
  for (const auto& r : runs) {
    out.current_term.push_back(r.cur);
    out.gradient_term.push_back(r.grad);
    for (std::size_t f = 0; f < Fs.size(); ++f) out.dissipative[f].push_back(r.diss[f]);
  }
  return out;
}

StatSeries bg_residual(const BgSpec& spec, const LocalFunction& F, double a_hat) {
  const auto raw = bg_residual_integrals(spec, {F});
  StatSeries out;
  out.grid_name = "a_hat";
  out.replicas = spec.replicas;
  out.seed = spec.seed;
  RunningStat stat;
  for (std::size_t r = 0; r < raw.current_term.size(); ++r) {
    const double i_val = raw.current_term[r] + a_hat * raw.gradient_term[r] - raw.dissipative[0][r];
    stat.add(i_val * i_val);
  }
  out.grid.push_back(a_hat);
  out.estimate.push_back(stat.mean());
  out.std_error.push_back(stat.std_error());
  return out;
}

}  // namespace fluctlab
