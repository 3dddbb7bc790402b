#include "kpnf/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "kpnf/errors.hpp"
#include "kpnf/io.hpp"
#include "kpnf/multilinear.hpp"

namespace kpnf {
namespace {

using Coeffs = std::vector<cplx>;

// RK4 in interaction variables. Only the n1 > 0 half is advanced; the other
// half is refreshed by conjugation whenever u is rebuilt.
class Stepper {
 public:
  Stepper(const Lattice& lat, double eps)
      : lat_(lat), eps_(eps), u_(lat.size()), k1_(lat.size()), k2_(lat.size()),
        k3_(lat.size()), k4_(lat.size()), tmp_(lat.size()) {}

  void step(Coeffs& w, double t, double h) {
    if (eps_ == 0.0) return;
    rhs(w, t, k1_);
    combine(w, k1_, 0.5 * h);
    rhs(tmp_, t + 0.5 * h, k2_);
    combine(w, k2_, 0.5 * h);
    rhs(tmp_, t + 0.5 * h, k3_);
    combine(w, k3_, h);
    rhs(tmp_, t + h, k4_);
    for (std::size_t n = lat_.half_begin(); n < lat_.size(); ++n) {
      w[n] += h / 6.0 * (k1_[n] + 2.0 * k2_[n] + 2.0 * k3_[n] + k4_[n]);
    }
  }

 private:
  void combine(const Coeffs& w, const Coeffs& k, double c) {
    for (std::size_t n = lat_.half_begin(); n < lat_.size(); ++n) tmp_[n] = w[n] + c * k[n];
  }

  void rhs(const Coeffs& w, double t, Coeffs& out) {
    for (std::size_t n = lat_.half_begin(); n < lat_.size(); ++n) {
      u_[n] = std::polar(1.0, lat_.omega(n) * t) * w[n];
      u_[lat_.negated(n)] = std::conj(u_[n]);
    }
    for (std::size_t n = lat_.half_begin(); n < lat_.size(); ++n) {
      cplx acc{};
      for (const Triad& tr : lat_.triads(n)) acc += u_[tr.k] * u_[tr.l];
      const cplx factor{0.0, -0.5 * eps_ * lat_.mode(n).n1};
      out[n] = std::polar(1.0, -lat_.omega(n) * t) * factor * acc;
    }
  }

  const Lattice& lat_;
  double eps_;
  Coeffs u_, k1_, k2_, k3_, k4_, tmp_;
};

SpectralField to_field(const LatticePtr& lat, const Coeffs& w, double t) {
  SpectralField u(lat);
  for (std::size_t n = lat->half_begin(); n < lat->size(); ++n) {
    u.set(n, std::polar(1.0, lat->omega(n) * t) * w[n]);
  }
  return u;
}

bool half_finite(const Lattice& lat, const Coeffs& w) {
  for (std::size_t n = lat.half_begin(); n < lat.size(); ++n) {
    if (!std::isfinite(w[n].real()) || !std::isfinite(w[n].imag())) return false;
  }
  return true;
}

struct StepPlan {
  long steps = 0;
  double h = 0.0;
};

StepPlan plan_steps(const Lattice& lat, double t_end, double dt) {
  if (dt <= 0.0) dt = default_dt(lat);
  if (!std::isfinite(t_end) || !std::isfinite(dt)) {
    throw std::invalid_argument("integrate: t_end and dt must be finite");
  }
  if (t_end == 0.0) return {0, 0.0};
  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(t_end) / dt - 1e-9)));
  return {steps, t_end / static_cast<double>(steps)};
}

void check_finite(const Lattice& lat, const Coeffs& w, double t) {
  if (!half_finite(lat, w)) {
    throw NonFinite("integrate: non-finite state at t = " + std::to_string(t) +
                    "; dt too large or the solution blew up");
  }
}

}  // namespace

double default_dt(const Lattice& lattice) { return 0.5 / (1.0 + lattice.max_abs_omega()); }

Trajectory integrate(const SpectralField& u0, double eps, double t_end,
                     const IntegratorConfig& cfg) {
  if (cfg.record_stride < 1) throw std::invalid_argument("integrate: record_stride must be >= 1");
  const Lattice& lat = u0.lattice();
  const StepPlan plan = plan_steps(lat, t_end, cfg.dt);

  Trajectory traj;
  traj.eps = eps;
  traj.dt = plan.h;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);

  Coeffs w(u0.coeffs().begin(), u0.coeffs().end());
  Stepper stepper(lat, eps);
  for (long i = 0; i < plan.steps; ++i) {
    const double t = static_cast<double>(i) * plan.h;
    stepper.step(w, t, plan.h);
    const long done = i + 1;
    if (done % cfg.record_stride == 0 || done == plan.steps) {
      const double tn = done == plan.steps ? t_end : static_cast<double>(done) * plan.h;
      check_finite(lat, w, tn);
      traj.times.push_back(tn);
      traj.states.push_back(to_field(u0.lattice_ptr(), w, tn));
    }
  }
  return traj;
}

SpectralField evolve(const SpectralField& u0, double eps, double t_end, double dt) {
  const Lattice& lat = u0.lattice();
  const StepPlan plan = plan_steps(lat, t_end, dt);
  Coeffs w(u0.coeffs().begin(), u0.coeffs().end());
  Stepper stepper(lat, eps);
  for (long i = 0; i < plan.steps; ++i) {
    stepper.step(w, static_cast<double>(i) * plan.h, plan.h);
    if ((i & 63) == 63) check_finite(lat, w, static_cast<double>(i + 1) * plan.h);
  }
  check_finite(lat, w, t_end);
  return to_field(u0.lattice_ptr(), w, t_end);
}

double select_dt(const SpectralField& u0, double eps, double t_end, double target,
                 double initial) {
  double dt = initial > 0.0 ? initial : default_dt(u0.lattice());
  if (eps == 0.0 || t_end == 0.0) return dt;
  SpectralField coarse = evolve(u0, eps, t_end, dt);
  for (int halvings = 0; halvings < 30; ++halvings) {
    SpectralField fine = evolve(u0, eps, t_end, 0.5 * dt);
    const double scale = std::max(max_abs(fine), 1e-300);
    if (max_abs_diff(coarse, fine) / scale < target) return dt;
    dt *= 0.5;
    coarse = std::move(fine);
  }
  throw NonFinite("select_dt: step-halving did not reach the target accuracy");
}

double normal_form_residual(const Trajectory& traj, double s) {
  const std::size_t count = traj.states.size();
  if (count < 3) {
    throw TooFewSamples("normal_form_residual: need at least 3 samples, got " +
                        std::to_string(count));
  }
  const double eps = traj.eps;
  std::vector<SpectralField> rotated;
  rotated.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SpectralField v = traj.states[i];
    if (eps != 0.0) v.axpy(eps, s_map(traj.states[i], traj.states[i]));
    rotated.push_back(apply_free_flow(v, -traj.times[i]));
  }

  double worst = 0.0;
  bool any = false;
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double left = traj.times[i] - traj.times[i - 1];
    const double right = traj.times[i + 1] - traj.times[i];
    if (std::abs(left - right) > 1e-9 * std::abs(left)) continue;
    any = true;
    SpectralField derivative = rotated[i + 1] - rotated[i - 1];
    derivative *= 1.0 / (left + right);
    SpectralField residual = apply_free_flow(derivative, traj.times[i]);
    if (eps != 0.0) {
      const SpectralField& u = traj.states[i];
      residual.axpy(-eps * eps, f_map(u, u, u));
    }
    worst = std::max(worst, hs_norm(residual, s));
  }
  if (!any) throw TooFewSamples("normal_form_residual: no equally spaced sample triple");
  return worst;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,n1,n2,re,im\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const SpectralField& u = traj.states[i];
    const std::string t = format_double(traj.times[i]);
    for (std::size_t n = 0; n < u.size(); ++n) {
      const WaveVector m = u.lattice().mode(n);
      os << t << ',' << m.n1 << ',' << m.n2 << ',' << format_double(u[n].real()) << ','
         << format_double(u[n].imag()) << '\n';
    }
  }
}

}  // namespace kpnf
