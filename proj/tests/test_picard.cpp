#include <cmath>

#include "doctest.h"
#include "kpnf/errors.hpp"
#include "kpnf/galerkin.hpp"
#include "kpnf/multilinear.hpp"
#include "kpnf/picard.hpp"
#include "oracles.hpp"

using namespace kpnf;

namespace {

// Random datum with ||u0||_{H^1.5} = norm.
SpectralField datum(const LatticePtr& lat, unsigned seed, double norm = 1.0) {
  SpectralField u = oracle::random_field(lat, seed);
  return (norm / hs_norm(u, 1.5)) * u;
}

}  // namespace

TEST_CASE("phase integral: limit branch and continuity") {
  CHECK(phase_integral(0.0, 2.0) == cplx{2.0, 0.0});
  CHECK(phase_integral(1e-10, 2.0) == cplx{2.0, 0.0});
  const double t = 1.7;
  const double theta = std::nextafter(kPhaseTolerance, 1.0);
  CHECK(std::abs(phase_integral(theta, t) - t) <= kPhaseTolerance * t * t / 2.0 + 1e-15);
  // Generic value against the defining formula.
  const cplx expected = (std::exp(cplx{0.0, 3.0 * t}) - 1.0) / cplx{0.0, 3.0};
  CHECK(std::abs(phase_integral(3.0, t) - expected) <= 1e-15);
}

TEST_CASE("iterates vanish at t = 0") {
  const auto lat = Lattice::make({3, 3});
  const SpectralField u0 = datum(lat, 1);
  CHECK(max_abs(picard_b(u0, 0.0)) == 0.0);
  CHECK(max_abs(picard_c(u0, 0.0)) == 0.0);
  CHECK(max_abs(f_integral(u0, 0.0)) == 0.0);
}

TEST_CASE("closed forms equal their operator decompositions") {
  const auto lat = Lattice::make({4, 4});
  for (unsigned seed = 0; seed < 5; ++seed) {
    const SpectralField u0 = datum(lat, 40 + seed);
    for (const double t : {0.3, 1.0, -2.2, 7.5}) {
      const SpectralField a = apply_free_flow(u0, t);
      const SpectralField b = picard_b(u0, t);
      const SpectralField b_ops = apply_free_flow(s_map(u0, u0), t) - s_map(a, a);
      CHECK(relative_diff(b, b_ops) <= 1e-12);
      const SpectralField c = picard_c(u0, t);
      const SpectralField c_ops = f_integral(u0, t) - 2.0 * s_map(a, b);
      CHECK(relative_diff(c, c_ops) <= 1e-11);
      CHECK(b.is_real_symmetric(0.0));
      CHECK(c.is_real_symmetric(0.0));
    }
  }
}

TEST_CASE("iterates match their defining ODEs integrated by RK4") {
  const auto lat = Lattice::make({3, 3});
  const SpectralField u0 = datum(lat, 5);
  const auto ode = oracle::picard_by_ode(u0, 0.5, 8000);
  CHECK(relative_diff(picard_b(u0, 0.5), ode.b) <= 1e-8);
  CHECK(relative_diff(picard_c(u0, 0.5), ode.c) <= 1e-7);
}

TEST_CASE("f matches quadrature of U(t-s) F(a(s),a(s),a(s))") {
  const auto lat = Lattice::make({3, 3});
  const SpectralField u0 = datum(lat, 6);
  const double t = 1.0;
  auto integrand = [&](double s) {
    const SpectralField a = apply_free_flow(u0, s);
    const SpectralField v = apply_free_flow(f_map(a, a, a), t - s);
    return oracle::CVec(v.coeffs().begin(), v.coeffs().end());
  };
  const oracle::CVec q = oracle::integrate_vector(integrand, 0.0, t, 1e-13);
  SpectralField ref(lat);
  for (std::size_t i = lat->half_begin(); i < lat->size(); ++i) ref.set(i, q[i]);
  CHECK(relative_diff(f_integral(u0, t), ref) <= 1e-9);
}

TEST_CASE("f solves f' - Lf = F(a,a,a)") {
  const auto lat = Lattice::make({3, 2});
  const SpectralField u0 = datum(lat, 7);
  const double t = 0.8;
  const double h = 1e-4;
  SpectralField deriv = f_integral(u0, t + h) - f_integral(u0, t - h);
  deriv *= 1.0 / (2.0 * h);
  const SpectralField a = apply_free_flow(u0, t);
  const SpectralField lhs = deriv - apply_L(f_integral(u0, t));
  const double scale = max_abs(f_map(a, a, a));
  // Centered differences of a function with frequencies up to ~3 max|omega|.
  const double w = 3.0 * lat->max_abs_omega();
  CHECK(max_abs_diff(lhs, f_map(a, a, a)) <= 10.0 * w * w * w * h * h / 6.0 * scale + 1e-9);
}

TEST_CASE("d and w extraction") {
  const auto lat = Lattice::make({3, 3});
  const SpectralField u0 = datum(lat, 8);

  CHECK(max_abs(extract_d(u0, u0, 0.0, 0.1)) == 0.0);
  CHECK(max_abs(extract_w(u0, u0, 0.0, 0.1)) <= 1e-14);
  CHECK_THROWS_AS(extract_d(u0, u0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(extract_w(u0, u0, 1.0, 0.0), std::invalid_argument);

  const double t = 1.0;
  const double dt = 1e-3;
  // Larger data so that eps^3 d stands well above the integration error.
  const SpectralField big = datum(lat, 8, 4.0);
  SUBCASE("d depends on eps only at higher order") {
    const double eps = 0.1;
    const SpectralField d1 = extract_d(evolve(big, eps, t, dt), big, t, eps);
    const SpectralField d2 = extract_d(evolve(big, eps / 2, t, dt), big, t, eps / 2);
    const SpectralField d4 = extract_d(evolve(big, eps / 4, t, dt), big, t, eps / 4);
    const double gap1 = max_abs_diff(d1, d2);
    const double gap2 = max_abs_diff(d2, d4);
    // d(eps) = d(0) + eps d'(0) + ...: successive gaps shrink by about 2.
    CHECK(gap1 > 0.0);
    CHECK(gap2 / gap1 == doctest::Approx(0.5).epsilon(0.2));
  }
  SUBCASE("w decomposition") {
    auto decomposition = [](const SpectralField& ut, const SpectralField& init, double tt,
                            double eps) {
      const PicardBundle bundle = PicardBundle::build(init, tt, eps);
      const SpectralField d = extract_d(ut, bundle);
      SpectralField rhs = lambda_eps(d, bundle) + s_map(bundle.b, bundle.b);
      rhs.axpy(2.0, s_map(bundle.a, bundle.c));
      rhs.axpy(2.0 * eps, s_map(bundle.b, bundle.c));
      rhs.axpy(eps * eps, s_map(bundle.c, bundle.c));
      return relative_diff(extract_w(ut, init, tt, eps), rhs);
    };
    // On an evolved state w is eps^-3 times a cancellation of O(1) terms, so
    // rounding grows like eps^-3.
    for (const double eps : {0.2, 0.1, 0.05}) {
      const double allowed = 1e-10 * std::pow(0.2 / eps, 3);
      CHECK(decomposition(evolve(big, eps, t, dt), big, t, eps) <= allowed);
    }
    // The identity is algebraic in u_t, so an unrelated field checks it with no cancellation.
    for (unsigned seed = 0; seed < 5; ++seed) {
      const SpectralField other = datum(lat, 500 + seed);
      CHECK(decomposition(other, big, t, 0.1) <= 1e-12);
    }
  }
  SUBCASE("rescaling u0 -> 2 u0, eps -> eps/2 multiplies d and w by 16") {
    const double eps = 0.1;
    const SpectralField ut = evolve(u0, eps, t, dt);
    const SpectralField ut2 = evolve(2.0 * u0, eps / 2, t, dt);
    CHECK(relative_diff(ut2, 2.0 * ut) <= 1e-13);
    CHECK(relative_diff(extract_d(ut2, 2.0 * u0, t, eps / 2),
                        16.0 * extract_d(ut, u0, t, eps)) <= 1e-9);
    CHECK(relative_diff(extract_w(ut2, 2.0 * u0, t, eps / 2),
                        16.0 * extract_w(ut, u0, t, eps)) <= 1e-9);
  }
}

TEST_CASE("Lambda_eps") {
  const auto lat = Lattice::make({3, 3});
  const SpectralField u0 = datum(lat, 9);
  const PicardBundle bundle = PicardBundle::build(u0, 1.0, 0.1);
  const SpectralField d = datum(lat, 10, 2.0);

  PicardBundle frozen = bundle;
  frozen.eps = 0.0;
  CHECK(max_abs_diff(lambda_eps(d, frozen), d) == 0.0);
  CHECK(max_abs(lambda_eps(SpectralField(lat), bundle)) == 0.0);

  SUBCASE("Jacobian against finite differences") {
    const SpectralField h = datum(lat, 11);
    const double eps = bundle.eps;
    SpectralField jac = h;
    jac.axpy(2 * eps, s_map(bundle.a, h));
    jac.axpy(2 * eps * eps, s_map(bundle.b, h));
    jac.axpy(2 * eps * eps * eps, s_map(bundle.c, h));
    jac.axpy(2 * eps * eps * eps * eps, s_map(d, h));
    const double step = 1e-5;
    SpectralField fd = lambda_eps(d + step * h, bundle) - lambda_eps(d - step * h, bundle);
    fd *= 1.0 / (2 * step);
    CHECK(relative_diff(fd, jac) <= 1e-6);
  }

  SUBCASE("inversion round trip") {
    const SpectralField g = lambda_eps(d, bundle);
    const SpectralField back = invert_lambda_eps(g, bundle, 1e-13, 200);
    CHECK(hs_norm(lambda_eps(back, bundle) - g, 1.5) <= 1e-13);
    CHECK(relative_diff(back, d) <= 1e-11);
  }

  SUBCASE("eps = 0 returns g") {
    const SpectralField out = invert_lambda_eps(d, frozen, 1e-14, 1);
    CHECK(max_abs_diff(out, d) == 0.0);
  }

  SUBCASE("2-Lipschitz inverse on sampled pairs") {
    for (unsigned seed = 0; seed < 10; ++seed) {
      const SpectralField g1 = datum(lat, 100 + seed, 1.5);
      const SpectralField g2 = datum(lat, 200 + seed, 1.5);
      const SpectralField d1 = invert_lambda_eps(g1, bundle, 1e-13, 200);
      const SpectralField d2 = invert_lambda_eps(g2, bundle, 1e-13, 200);
      CHECK(hs_norm(d1 - d2, 1.5) <= 2.0 * hs_norm(g1 - g2, 1.5));
    }
  }

  SUBCASE("non-contracting parameters are detected") {
    const PicardBundle strong = PicardBundle::build(datum(lat, 12, 50.0), 1.0, 1.0);
    const SpectralField g = datum(lat, 13, 50.0);
    CHECK_THROWS_AS(invert_lambda_eps(g, strong, 1e-12, 500), NonContraction);
    CHECK_THROWS_AS(invert_lambda_eps(lambda_eps(d, bundle), bundle, 1e-13, 2), MaxIterExceeded);
  }
}
