#pragma once

// Time integration of the Galerkin-truncated KP-II system
//   du_n/dt = i omega_n u_n - (i eps n1 / 2) sum_{k+l=n} u_k u_l.

#include <iosfwd>
#include <vector>

#include "kpnf/lattice.hpp"

namespace kpnf {

struct IntegratorConfig {
  double dt = 0.0;  // <= 0 means default_dt(box)
  int record_stride = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  double eps = 0.0;
  double dt = 0.0;  // signed step actually used

  const SpectralField& u0() const { return states.front(); }
  const SpectralField& final_state() const { return states.back(); }
};

/// 0.5 / (1 + max |omega|) over the box.
double default_dt(const Lattice& lattice);

/// Integrating-factor RK4 in w_n = exp(-i omega_n t) u_n. The step is
/// |t_end| / ceil(|t_end| / dt), signed like t_end. States are recorded every
/// `record_stride` steps and always at t_end. Throws NonFinite on overflow.
Trajectory integrate(const SpectralField& u0, double eps, double t_end,
                     const IntegratorConfig& cfg = {});

/// Final state only; skips the recording.
SpectralField evolve(const SpectralField& u0, double eps, double t_end, double dt);

/// Starting from `initial` (or default_dt when <= 0), halves dt until the
/// step-halving estimate max|u_dt - u_{dt/2}| / max|u| at t_end is below `target`.
double select_dt(const SpectralField& u0, double eps, double t_end, double target = 1e-8,
                 double initial = 0.0);

/// max over interior samples of || D(v) - L v - eps^2 F(u,u,u) ||_{H^s}, with
/// v = u + eps S(u,u) and D the centered difference of the rotated v.
/// Only sample triples with equal spacing on both sides are used.
/// Throws TooFewSamples when there is no such triple.
double normal_form_residual(const Trajectory& traj, double s = kDefaultSobolevIndex);

/// One row per (time, mode) with columns t,n1,n2,re,im.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace kpnf
