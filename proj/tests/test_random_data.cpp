#include <cmath>
#include <random>

#include "doctest.h"
#include "kpnf/random_data.hpp"
#include "oracles.hpp"

using namespace kpnf;

TEST_CASE("law moments") {
  const GMoments s = RandomLaw::constant(1.0).moments();
  CHECK(s.m2 == 1.0);
  CHECK(s.m4 == 1.0);
  CHECK(s.m4 - 2 * s.m2 * s.m2 == -1.0);

  const GMoments tp = RandomLaw::two_point(0.0, 1.7, 0.3).moments();
  CHECK(tp.m2 == doctest::Approx(0.3 * 1.7 * 1.7).epsilon(1e-15));
  CHECK(tp.m4 == doctest::Approx(0.3 * std::pow(1.7, 4)).epsilon(1e-15));

  for (const RandomLaw law : {RandomLaw::constant(2.0), RandomLaw::two_point(0.2, 3.0, 0.1),
                              RandomLaw::clipped_gaussian(1.0, 2.0),
                              RandomLaw::clipped_gaussian(0.5, 10.0)}) {
    const GMoments g = law.moments();
    CHECK(g.m4 >= g.m2 * g.m2);
  }
  // Barely clipped: close to the complex Gaussian values sigma^2 and 2 sigma^4.
  const GMoments cg = RandomLaw::clipped_gaussian(0.5, 10.0).moments();
  CHECK(cg.m2 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(cg.m4 == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("sampled moduli match the analytic moments") {
  const int draws = 100000;
  for (const RandomLaw law : {RandomLaw::two_point(0.5, 1.5, 0.25),
                              RandomLaw::clipped_gaussian(1.0, 1.3)}) {
    double s2 = 0, s4 = 0, s8 = 0;
    for (int i = 0; i < draws; ++i) {
      const double r2 = std::norm(sample_g(law, 5, static_cast<std::uint64_t>(i), {1, 0}));
      s2 += r2;
      s4 += r2 * r2;
      s8 += r2 * r2 * r2 * r2;
    }
    const GMoments g = law.moments();
    const double m2 = s2 / draws, m4 = s4 / draws;
    const double se2 = std::sqrt((m4 - m2 * m2) / draws);
    const double se4 = std::sqrt((s8 / draws - m4 * m4) / draws);
    CHECK(std::abs(m2 - g.m2) <= 4 * se2);
    CHECK(std::abs(m4 - g.m4) <= 4 * se4);
    CHECK(law.r_max() * law.r_max() >= m4 / m2);
  }
}

TEST_CASE("parse and text round trip") {
  CHECK(RandomLaw::parse("steinhaus").spec() == "constant:1");
  for (const char* text : {"constant:2.5", "two_point:0,1.4142135623730951,0.5",
                           "clipped_gaussian:1,3"}) {
    const RandomLaw law = RandomLaw::parse(text);
    CHECK(RandomLaw::parse(law.spec()).spec() == law.spec());
  }
  CHECK_THROWS(RandomLaw::parse("gaussian:1"));
  CHECK_THROWS(RandomLaw::parse("two_point:1,2"));
  CHECK_THROWS(RandomLaw::parse("two_point:1,2,1.5"));
  CHECK_THROWS(RandomLaw::parse("constant:-1"));
  CHECK(SpectrumProfile::parse("power:1,3").spec() == "power:1,3");
  CHECK(SpectrumProfile::parse("box:8,0.5").lambda({8, -8}) == 0.5);
  CHECK(SpectrumProfile::parse("box:8,0.5").lambda({9, 0}) == 0.0);
  CHECK_THROWS(SpectrumProfile::parse("box:2.5,1"));
}

TEST_CASE("sampling is deterministic and real") {
  const auto lat = Lattice::make({3, 2});
  const RandomLaw law = RandomLaw::clipped_gaussian(1.0, 2.0);
  const SpectrumProfile prof = SpectrumProfile::power_decay(1.0, 3.0);
  const SpectralField a = sample_u0(prof, law, lat, 42, 7);
  const SpectralField b = sample_u0(prof, law, lat, 42, 7);
  CHECK(max_abs_diff(a, b) == 0.0);
  CHECK(a.is_real_symmetric(0.0));
  CHECK(max_abs_diff(a, sample_u0(prof, law, lat, 42, 8)) > 0.0);
  CHECK(max_abs_diff(a, sample_u0(prof, law, lat, 43, 7)) > 0.0);
}

TEST_CASE("constant modulus gives |coefficient| = lambda") {
  const auto lat = Lattice::make({3, 3});
  const SpectrumProfile prof = SpectrumProfile::power_decay(0.7, 2.5);
  const SpectralField u = sample_u0(prof, RandomLaw::constant(1.0), lat, 1, 0);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    CHECK(std::abs(u[i]) == doctest::Approx(prof.lambda(lat->mode(i))).epsilon(1e-15));
  }
}

TEST_CASE("E g = 0") {
  const int draws = 100000;
  const RandomLaw law = RandomLaw::constant(1.0);
  cplx sum{};
  for (int i = 0; i < draws; ++i) sum += sample_g(law, 9, static_cast<std::uint64_t>(i), {2, 1});
  sum /= static_cast<double>(draws);
  CHECK(std::abs(sum.real()) <= 4.0 / std::sqrt(draws));
  CHECK(std::abs(sum.imag()) <= 4.0 / std::sqrt(draws));
}

TEST_CASE("normalization") {
  const auto single = Lattice::make({1, 0});
  const RandomLaw steinhaus = RandomLaw::constant(1.0);
  const SpectrumProfile p1 =
      normalize_profile(SpectrumProfile::power_decay(1.0, 3.0), steinhaus, *single, 1.5);
  CHECK(p1.lambda({1, 0}) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  const auto lat = Lattice::make({3, 3});
  for (const RandomLaw law : {steinhaus, RandomLaw::two_point(0.3, 2.0, 0.4),
                              RandomLaw::clipped_gaussian(1.0, 2.5)}) {
    const SpectrumProfile once =
        normalize_profile(SpectrumProfile::power_decay(3.0, 2.7), law, *lat, 1.5);
    const SpectrumProfile twice = normalize_profile(once, law, *lat, 1.5);
    CHECK(twice.amplitude == doctest::Approx(once.amplitude).epsilon(1e-14));
    for (std::uint64_t i = 0; i < 100; ++i) {
      CHECK(hs_norm(sample_u0(once, law, lat, 3, i), 1.5) <= 1.0 + 1e-12);
    }
  }
  CHECK_THROWS_AS(
      normalize_profile(SpectrumProfile::power_decay(0.0, 3.0), steinhaus, *lat, 1.5),
      std::invalid_argument);
}

TEST_CASE("fourth moments follow the pairing rule") {
  const RandomLaw law = RandomLaw::two_point(0.5, 1.5, 0.5);
  const GMoments g = law.moments();
  const std::vector<WaveVector> pool{{1, 0}, {-1, 0}, {1, 1}, {-1, -1}, {2, 0}, {-2, 0}};
  std::mt19937 gen(2024);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);

  std::vector<std::array<WaveVector, 4>> quads;
  // Half balanced by construction (nonzero expectation), half arbitrary.
  while (quads.size() < 10) {
    const WaveVector a = pool[pick(gen)];
    const WaveVector b = pool[pick(gen)];
    quads.push_back({a, b, -a, -b});
  }
  while (quads.size() < 20) {
    quads.push_back({pool[pick(gen)], pool[pick(gen)], pool[pick(gen)], pool[pick(gen)]});
  }

  const int draws = 100000;
  int nonzero = 0;
  for (const auto& q : quads) {
    std::vector<oracle::Factor> factors;
    for (const auto& v : q) factors.push_back({v, false});
    const double predicted = oracle::pairing_expectation(factors, {g.m2, g.m4});
    if (predicted != 0.0) ++nonzero;
    double sr = 0, si = 0, sr2 = 0, si2 = 0;
    for (int i = 0; i < draws; ++i) {
      cplx prod{1.0, 0.0};
      for (const auto& v : q) {
        const WaveVector rep = v.n1 > 0 ? v : -v;
        const cplx z = sample_g(law, 17, static_cast<std::uint64_t>(i), rep);
        prod *= v.n1 > 0 ? z : std::conj(z);
      }
      sr += prod.real();
      si += prod.imag();
      sr2 += prod.real() * prod.real();
      si2 += prod.imag() * prod.imag();
    }
    const double mr = sr / draws, mi = si / draws;
    const double ser = std::sqrt(std::max(0.0, sr2 / draws - mr * mr) / draws);
    const double sei = std::sqrt(std::max(0.0, si2 / draws - mi * mi) / draws);
    CHECK(std::abs(mr - predicted) <= 4 * ser + 1e-12);
    CHECK(std::abs(mi) <= 4 * sei + 1e-12);
  }
  CHECK(nonzero >= 10);
  // The case table: m4 for a repeated class, m2^2 for two distinct classes.
  CHECK(oracle::pairing_expectation({{{1, 0}}, {{1, 0}}, {{-1, 0}}, {{-1, 0}}}, {g.m2, g.m4}) ==
        g.m4);
  CHECK(oracle::pairing_expectation({{{1, 0}}, {{2, 0}}, {{-1, 0}}, {{-2, 0}}}, {g.m2, g.m4}) ==
        g.m2 * g.m2);
  CHECK(oracle::pairing_expectation({{{1, 0}}, {{1, 0}}, {{1, 0}}, {{-1, 0}}}, {g.m2, g.m4}) ==
        0.0);
}
