#include "fluctlab/dynamics.hpp"

#include <cmath>

namespace fluctlab {

void bond_update(VelocityField& p, int bond, double dt_micro, const Coupling& a, Rng& rng,
                 double stability_ratio) {
  const int n = p.size();
  const auto x = static_cast<std::size_t>(bond);
  const auto x1 = static_cast<std::size_t>((bond + 1) % n);
  const double px = p.p[x];
  const double ps = p.p[x1];
  if (px == 0.0 && ps == 0.0) return;  // rho = 0 is a fixed point

  double dtheta;
  if (a.is_constant()) {
    dtheta = std::sqrt(a.constant_value() * dt_micro) * rng.normal();
  } else {
    const double av = a(px, ps);
    const double aprime = -ps * a.dr(px, ps) + px * a.ds(px, ps);  // d atil / d theta
    const double drift = 0.5 * aprime * dt_micro;
    if (std::abs(drift) > stability_ratio)
      throw StabilityError(bond, std::sqrt(2.0 * total_energy(p)), drift);
    dtheta = drift + std::sqrt(av * dt_micro) * rng.normal();
  }
  const double c = std::cos(dtheta);
  const double s = std::sin(dtheta);
  p.p[x] = c * px - s * ps;
  p.p[x1] = s * px + c * ps;
}

void sweep_step(VelocityField& p, const ModelParams& params, const IntegratorConfig& cfg,
                double dt_micro, Rng& rng) {
  const int nb = params.n_bonds();
  switch (cfg.sweep) {
    case SweepOrder::even_odd:
      for (int b = 0; b < nb; b += 2) bond_update(p, b, dt_micro, params.coupling, rng, cfg.stability_ratio);
      for (int b = 1; b < nb; b += 2) bond_update(p, b, dt_micro, params.coupling, rng, cfg.stability_ratio);
      break;
    case SweepOrder::random_sequential:
      for (int k = 0; k < nb; ++k) {
        const int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(nb)));
        bond_update(p, b, dt_micro, params.coupling, rng, cfg.stability_ratio);
      }
      break;
  }
}

void evolve_steps(VelocityField& p, long n_steps, const ModelParams& params,
                  const IntegratorConfig& cfg, Rng& rng,
                  const std::function<void(long, const VelocityField&)>& cb) {
  params.validate();
  if (p.size() != params.n_sites)
    throw std::invalid_argument("evolve: state size does not match n_sites");
  const double dtm = cfg.dt_micro(params.n_sites);
  cb(0, p);
  for (long s = 1; s <= n_steps; ++s) {
    sweep_step(p, params, cfg, dtm, rng);
    cb(s, p);
  }
}

Trajectory evolve(VelocityField p, double t_final, const ModelParams& params,
                  const IntegratorConfig& cfg, const std::vector<Observer>& observers,
                  int record_every) {
  if (t_final < 0.0) throw std::invalid_argument("evolve: negative final time");
  if (record_every < 1) throw std::invalid_argument("evolve: record_every must be >= 1");
  const long n_steps = std::lround(t_final / cfg.dt_macro);

  Trajectory traj;
  traj.seed = cfg.seed;
  traj.initial_energy = total_energy(p);
  traj.names.reserve(observers.size());
  for (const auto& o : observers) traj.names.push_back(o.name);
  traj.values.resize(observers.size());

  const double e0 = traj.initial_energy;
  const double e_scale = std::max(e0, 1e-300);
  Rng rng(cfg.seed);
  evolve_steps(p, n_steps, params, cfg, rng, [&](long step, const VelocityField& state) {
    if (step % record_every != 0 && step != n_steps) return;
    traj.times.push_back(static_cast<double>(step) * cfg.dt_macro);
    for (std::size_t o = 0; o < observers.size(); ++o)
      traj.values[o].push_back(observers[o].eval(state));
    const double drift = std::abs(total_energy(state) - e0) / e_scale;
    traj.max_energy_drift = std::max(traj.max_energy_drift, drift);
  });
  return traj;
}

}  // namespace fluctlab
