#pragma once

// Random initial data u0 = sum_n lambda_n g_n e^{inz}: modulus laws for g_n,
// deterministic amplitude profiles lambda_n and counter-based sampling.

#include <cstdint>
#include <string>
#include <string_view>

#include "kpnf/lattice.hpp"

namespace kpnf {

struct GMoments {
  double m2 = 0.0;  // E|g|^2
  double m4 = 0.0;  // E|g|^4
};

/// g = R exp(i Theta), Theta uniform on [0, 2 pi) and independent of R.
struct RandomLaw {
  enum class Kind { constant, two_point, clipped_gaussian };

  Kind kind = Kind::constant;
  // constant: a = r.  two_point: R = a w.p. 1-p, b w.p. p.
  // clipped_gaussian: R = min(Rayleigh with E R^2 = a^2, b).
  double a = 1.0;
  double b = 0.0;
  double p = 0.0;

  static RandomLaw constant(double r = 1.0);
  static RandomLaw two_point(double r1, double r2, double p);
  static RandomLaw clipped_gaussian(double sigma, double r_max);

  /// "steinhaus", "constant:R", "two_point:R1,R2,P", "clipped_gaussian:SIGMA,RMAX".
  static RandomLaw parse(std::string_view text);
  std::string spec() const;

  /// Essential supremum of R.
  double r_max() const;
  GMoments moments() const;
};

inline GMoments g_moments(const RandomLaw& law) { return law.moments(); }

struct SpectrumProfile {
  enum class Kind { power_decay, box_constant };

  Kind kind = Kind::power_decay;
  double amplitude = 1.0;  // A, or the constant level inside the square box
  double exponent = 3.0;   // power_decay: lambda_n = A |n|^{-exponent}
  int side = 0;            // box_constant: lambda_n = A iff max(|n1|,|n2|) <= side

  static SpectrumProfile power_decay(double amplitude, double exponent);
  static SpectrumProfile box_constant(int side, double level);

  /// "power:A,R" or "box:N,LEVEL".
  static SpectrumProfile parse(std::string_view text);
  std::string spec() const;

  double lambda(WaveVector n) const;
};

/// Rescales the amplitude so that r_max * ||sum lambda_n e^{inz}||_{H^s} = 1 on
/// the lattice, which bounds every sample by 1 in H^s. Throws
/// std::invalid_argument for a profile that vanishes on the lattice.
SpectrumProfile normalize_profile(const SpectrumProfile& profile, const RandomLaw& law,
                                  const Lattice& lattice, double s);

/// g for mode n (n1 > 0) of sample `index`. Pure function of its arguments.
cplx sample_g(const RandomLaw& law, std::uint64_t seed, std::uint64_t index, WaveVector n);

/// Field with coefficient lambda_n g_n for n1 > 0 and conjugates for n1 < 0.
SpectralField sample_u0(const SpectrumProfile& profile, const RandomLaw& law,
                        const LatticePtr& lattice, std::uint64_t seed, std::uint64_t index);

}  // namespace kpnf
