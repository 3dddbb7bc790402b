#include "kpnf/picard.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kpnf/errors.hpp"
#include "kpnf/multilinear.hpp"

namespace kpnf {
namespace {

// exp(i x) - 1 without cancellation for small x.
cplx expm1i(double x) {
  const double h = std::sin(0.5 * x);
  return {-2.0 * h * h, std::sin(x)};
}

void require_positive_eps(double eps, const char* op) {
  if (eps == 0.0) throw std::invalid_argument(std::string(op) + ": eps must be nonzero");
}

}  // namespace

cplx phase_integral(double theta, double t) {
  if (std::abs(theta) <= kPhaseTolerance) return {t, 0.0};
  const double h = std::sin(0.5 * theta * t);
  return {std::sin(theta * t) / theta, 2.0 * h * h / theta};
}

SpectralField picard_b(const SpectralField& u0, double t) {
  const Lattice& lat = u0.lattice();
  SpectralField out(u0.lattice_ptr());
  for (std::size_t n = lat.half_begin(); n < lat.size(); ++n) {
    cplx acc{};
    for (const Triad& tr : lat.triads(n)) {
      acc += expm1i(tr.delta * t) / tr.delta * u0[tr.k] * u0[tr.l];
    }
    out.set(n, -0.5 * lat.mode(n).n1 * std::polar(1.0, lat.omega(n) * t) * acc);
  }
  return out;
}

SpectralField picard_c(const SpectralField& u0, double t) {
  const Lattice& lat = u0.lattice();
  SpectralField out(u0.lattice_ptr());
  for (std::size_t n = lat.half_begin(); n < lat.size(); ++n) {
    cplx acc{};
    for (const Triad& outer : lat.triads(n)) {
      const double l1 = lat.mode(outer.l).n1;
      const cplx three_wave = phase_integral(outer.delta, t);
      cplx inner{};
      for (const Triad& tr : lat.triads(outer.l)) {
        // omega_k + omega_j + omega_q - omega_n
        const double theta = outer.delta + tr.delta;
        inner += (phase_integral(theta, t) - three_wave) / (2.0 * tr.delta) * u0[tr.k] * u0[tr.l];
      }
      acc += l1 * u0[outer.k] * inner;
    }
    out.set(n, cplx{0.0, static_cast<double>(lat.mode(n).n1)} *
                   std::polar(1.0, lat.omega(n) * t) * acc);
  }
  return out;
}

SpectralField f_integral(const SpectralField& u0, double t) {
  const Lattice& lat = u0.lattice();
  SpectralField out(u0.lattice_ptr());
  for (std::size_t n = lat.half_begin(); n < lat.size(); ++n) {
    cplx acc{};
    for (const Triad& outer : lat.triads(n)) {
      const double l1 = lat.mode(outer.l).n1;
      cplx inner{};
      for (const Triad& tr : lat.triads(outer.l)) {
        inner += phase_integral(outer.delta + tr.delta, t) * u0[tr.k] * u0[tr.l];
      }
      acc += l1 / outer.delta * u0[outer.k] * inner;
    }
    // -(n1/2) * i * acc
    out.set(n, cplx{0.0, -0.5 * lat.mode(n).n1} * std::polar(1.0, lat.omega(n) * t) * acc);
  }
  return out;
}

PicardBundle PicardBundle::build(const SpectralField& u0, double t, double eps) {
  return PicardBundle{u0, apply_free_flow(u0, t), picard_b(u0, t), picard_c(u0, t), t, eps};
}

SpectralField extract_d(const SpectralField& u_t, const PicardBundle& bundle) {
  require_positive_eps(bundle.eps, "extract_d");
  require_same_box(u_t, bundle.u0, "extract_d");
  const double eps = bundle.eps;
  SpectralField d = u_t - bundle.a;
  d.axpy(-eps, bundle.b);
  d.axpy(-eps * eps, bundle.c);
  d *= 1.0 / (eps * eps * eps);
  return d;
}

SpectralField extract_d(const SpectralField& u_t, const SpectralField& u0, double t, double eps) {
  require_positive_eps(eps, "extract_d");
  return extract_d(u_t, PicardBundle::build(u0, t, eps));
}

SpectralField extract_w(const SpectralField& u_t, const SpectralField& u0, double t, double eps) {
  require_positive_eps(eps, "extract_w");
  require_same_box(u_t, u0, "extract_w");
  SpectralField v = u_t;
  v.axpy(eps, s_map(u_t, u_t));
  SpectralField w = v - apply_free_flow(u0, t);
  w.axpy(-eps, apply_free_flow(s_map(u0, u0), t));
  w.axpy(-eps * eps, f_integral(u0, t));
  w *= 1.0 / (eps * eps * eps);
  return w;
}

SpectralField lambda_eps(const SpectralField& d, const PicardBundle& bundle) {
  require_same_box(d, bundle.a, "lambda_eps");
  const double eps = bundle.eps;
  if (eps == 0.0) return d;
  SpectralField expansion = bundle.a;
  expansion.axpy(eps, bundle.b);
  expansion.axpy(eps * eps, bundle.c);
  SpectralField out = d;
  out.axpy(2.0 * eps, s_map(expansion, d));
  out.axpy(eps * eps * eps * eps, s_map(d, d));
  return out;
}

SpectralField invert_lambda_eps(const SpectralField& g, const PicardBundle& bundle, double tol,
                                int max_iter, double s) {
  SpectralField d = g;
  double previous = -1.0;
  int stalled = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    SpectralField correction = g - lambda_eps(d, bundle);
    const double residual = hs_norm(correction, s);
    if (!std::isfinite(residual)) {
      throw NonContraction("invert_lambda_eps: residual became non-finite");
    }
    if (residual <= tol) return d;
    if (previous >= 0.0) {
      stalled = residual > 0.9 * previous ? stalled + 1 : 0;
      if (stalled >= 5) {
        throw NonContraction("invert_lambda_eps: residual " + std::to_string(residual) +
                             " stopped contracting; eps or ||d|| outside the inversion regime");
      }
    }
    previous = residual;
    d += correction;
  }
  throw MaxIterExceeded("invert_lambda_eps: no convergence in " + std::to_string(max_iter) +
                        " iterations");
}

}  // namespace kpnf
