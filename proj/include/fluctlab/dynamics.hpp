#pragma once

#include <functional>
#include <string>

#include "fluctlab/model.hpp"
#include "fluctlab/stats.hpp"

namespace fluctlab {

enum class SweepOrder { even_odd, random_sequential };

struct IntegratorConfig {
  double dt_macro = 1e-3;  // step in macroscopic time units
  SweepOrder sweep = SweepOrder::even_odd;
  bool accelerate = true;  // run the N^2-speeded process (micro step = N^2 * dt_macro per bond)
  std::uint64_t seed = 0;
  double stability_ratio = 0.1;  // cap on |drift angle| per bond step

  double dt_micro(int n_sites) const {
    return accelerate ? dt_macro * static_cast<double>(n_sites) * static_cast<double>(n_sites)
                      : dt_macro;
  }
};

struct StabilityError : std::runtime_error {
  StabilityError(int bond, double state_norm, double drift)
      : std::runtime_error("integrator: drift angle " + std::to_string(drift) + " at bond " +
                           std::to_string(bond) + " exceeds stability ratio (|p| = " +
                           std::to_string(state_norm) + "); reduce dt"),
        bond(bond) {}
  int bond;
};

// One stochastic bond update. The pair (p_x, p_{x+1}) is rotated by the random
// angle increment of the angle diffusion
//     d theta = 1/2 atil'(theta) dt + sqrt(atil(theta)) dB,
// where atil(theta) = a(rho cos theta, rho sin theta); in these coordinates
// the bond generator is 1/2 d_theta(atil d_theta), and the rotation form of
// the update conserves the pair energy to roundoff.
void bond_update(VelocityField& p, int bond, double dt_micro, const Coupling& a, Rng& rng,
                 double stability_ratio = 0.1);

// Advance one macroscopic step: every bond receives one update of size
// dt_micro in the configured sweep order.
void sweep_step(VelocityField& p, const ModelParams& params, const IntegratorConfig& cfg,
                double dt_micro, Rng& rng);

struct Observer {
  std::string name;
  std::function<double(const VelocityField&)> eval;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[o][i] = observer o at times[i]
  double initial_energy = 0.0;
  double max_energy_drift = 0.0;  // max |E(t)-E(0)| / max(E(0), tiny), over sampling times
  std::uint64_t seed = 0;
};

// Evolve to macroscopic time T, recording observers every record_every steps
// (including t = 0 and the final time). Deterministic given cfg.seed.
Trajectory evolve(VelocityField p, double t_final, const ModelParams& params,
                  const IntegratorConfig& cfg, const std::vector<Observer>& observers,
                  int record_every = 1);

// Low-level driver: cb(step_index, state) runs after every macro step, and
// once with step_index 0 before the first step.
void evolve_steps(VelocityField& p, long n_steps, const ModelParams& params,
                  const IntegratorConfig& cfg, Rng& rng,
                  const std::function<void(long, const VelocityField&)>& cb);

}  // namespace fluctlab
