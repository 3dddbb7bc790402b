#pragma once

// Picard expansion u = a + eps b + eps^2 c + eps^3 d of the truncated KP-II
// flow, the normal-form variable v = u + eps S(u,u) and the map Lambda_eps that
// links the third-order terms of u and v.

#include "kpnf/lattice.hpp"

namespace kpnf {

/// Below this |theta| the oscillatory integral is evaluated as its limit t.
/// Only four-wave phases can vanish; three-wave ones satisfy |Delta| >= 3.
inline constexpr double kPhaseTolerance = 1e-9;

/// int_0^t exp(i theta t') dt'
cplx phase_integral(double theta, double t);

/// First Picard iterate b(t), from the closed form in the mode sums.
SpectralField picard_b(const SpectralField& u0, double t);

/// Second Picard iterate c(t). The inner pair (j, q) of each cubic term is
/// restricted to j + q in the box, matching the projected product.
SpectralField picard_c(const SpectralField& u0, double t);

/// f(t) = int_0^t U(t - t') F(a(t'), a(t'), a(t')) dt', closed form.
SpectralField f_integral(const SpectralField& u0, double t);

struct PicardBundle {
  SpectralField u0;
  SpectralField a;
  SpectralField b;
  SpectralField c;
  double t = 0.0;
  double eps = 0.0;

  static PicardBundle build(const SpectralField& u0, double t, double eps);
};

/// d = (u_t - a - eps b - eps^2 c) / eps^3. Rejects eps = 0.
SpectralField extract_d(const SpectralField& u_t, const PicardBundle& bundle);
SpectralField extract_d(const SpectralField& u_t, const SpectralField& u0, double t, double eps);

/// w = (v - a - eps U(t) S(u0,u0) - eps^2 f) / eps^3 with v = u_t + eps S(u_t,u_t).
SpectralField extract_w(const SpectralField& u_t, const SpectralField& u0, double t, double eps);

/// Lambda_eps(d) = d + 2 eps (S(a,d) + eps S(b,d) + eps^2 S(c,d)) + eps^4 S(d,d)
SpectralField lambda_eps(const SpectralField& d, const PicardBundle& bundle);

/// Solves Lambda_eps(d) = g by the iteration d <- d + (g - Lambda_eps(d))
/// started at d = g, i.e. the fixed point of g + (Id - Lambda_eps).
///
/// Stops once ||Lambda_eps(d) - g||_{H^s} <= tol. Throws NonContraction when
/// the residual fails to shrink by a factor 0.9 on 5 consecutive iterations,
/// MaxIterExceeded when max_iter is reached first.
SpectralField invert_lambda_eps(const SpectralField& g, const PicardBundle& bundle, double tol,
                                int max_iter, double s = kDefaultSobolevIndex);

}  // namespace kpnf
