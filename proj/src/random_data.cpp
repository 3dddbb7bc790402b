#include "kpnf/random_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kpnf/io.hpp"

namespace kpnf {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

// Uniform on [0, 1) with 53 random bits.
double uniform(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::vector<double> parse_args(std::string_view body, std::size_t count, std::string_view text) {
  std::vector<double> out;
  for (const auto& part : split(body, ',')) out.push_back(parse_double(part));
  if (out.size() != count) {
    throw std::invalid_argument("expected " + std::to_string(count) + " parameters in '" +
                                std::string(text) + "'");
  }
  return out;
}

std::pair<std::string, std::string> head_body(std::string_view text) {
  const std::string s = trim(text);
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, {}};
  return {trim(s.substr(0, colon)), s.substr(colon + 1)};
}

}  // namespace

RandomLaw RandomLaw::constant(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("constant law needs r > 0");
  return {Kind::constant, r, 0.0, 0.0};
}

RandomLaw RandomLaw::two_point(double r1, double r2, double p) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0) || !std::isfinite(r1) || !std::isfinite(r2)) {
    throw std::invalid_argument("two_point law needs finite r1, r2 >= 0");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("two_point law needs 0 <= p <= 1");
  if ((1.0 - p) * r1 * r1 + p * r2 * r2 == 0.0) {
    throw std::invalid_argument("two_point law is identically zero");
  }
  return {Kind::two_point, r1, r2, p};
}

RandomLaw RandomLaw::clipped_gaussian(double sigma, double r_max) {
  if (!(sigma > 0.0) || !(r_max > 0.0) || !std::isfinite(sigma) || !std::isfinite(r_max)) {
    throw std::invalid_argument("clipped_gaussian law needs sigma > 0 and finite r_max > 0");
  }
  return {Kind::clipped_gaussian, sigma, r_max, 0.0};
}

RandomLaw RandomLaw::parse(std::string_view text) {
  const auto [head, body] = head_body(text);
  if (head == "steinhaus" && body.empty()) return constant(1.0);
  if (head == "constant") return constant(parse_args(body, 1, text)[0]);
  if (head == "two_point") {
    const auto v = parse_args(body, 3, text);
    return two_point(v[0], v[1], v[2]);
  }
  if (head == "clipped_gaussian") {
    const auto v = parse_args(body, 2, text);
    return clipped_gaussian(v[0], v[1]);
  }
  throw std::invalid_argument("unknown law '" + std::string(text) + "'");
}

std::string RandomLaw::spec() const {
  switch (kind) {
    case Kind::constant:
      return "constant:" + format_double(a);
    case Kind::two_point:
      return "two_point:" + format_double(a) + "," + format_double(b) + "," + format_double(p);
    case Kind::clipped_gaussian:
      return "clipped_gaussian:" + format_double(a) + "," + format_double(b);
  }
  return {};
}

double RandomLaw::r_max() const {
  switch (kind) {
    case Kind::constant:
      return a;
    case Kind::two_point:
      return std::max(p < 1.0 ? a : 0.0, p > 0.0 ? b : 0.0);
    case Kind::clipped_gaussian:
      return b;
  }
  return 0.0;
}

GMoments RandomLaw::moments() const {
  switch (kind) {
    case Kind::constant:
      return {a * a, a * a * a * a};
    case Kind::two_point:
      return {(1.0 - p) * a * a + p * b * b, (1.0 - p) * std::pow(a, 4) + p * std::pow(b, 4)};
    case Kind::clipped_gaussian: {
      // R^2 = min(X, b^2) with X exponential of mean a^2.
      const double s2 = a * a;
      const double x = b * b / s2;
      const double tail = std::exp(-x);
      return {s2 * -std::expm1(-x), 2.0 * s2 * s2 * (1.0 - (1.0 + x) * tail)};
    }
  }
  return {};
}

SpectrumProfile SpectrumProfile::power_decay(double amplitude, double exponent) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude) || !std::isfinite(exponent)) {
    throw std::invalid_argument("power profile needs finite amplitude >= 0 and exponent");
  }
  return {Kind::power_decay, amplitude, exponent, 0};
}

SpectrumProfile SpectrumProfile::box_constant(int side, double level) {
  if (side < 1) throw std::invalid_argument("box profile needs side >= 1");
  if (!(level >= 0.0) || !std::isfinite(level)) {
    throw std::invalid_argument("box profile needs a finite level >= 0");
  }
  return {Kind::box_constant, level, 0.0, side};
}

SpectrumProfile SpectrumProfile::parse(std::string_view text) {
  const auto [head, body] = head_body(text);
  if (head == "power") {
    const auto v = parse_args(body, 2, text);
    return power_decay(v[0], v[1]);
  }
  if (head == "box") {
    const auto v = parse_args(body, 2, text);
    if (v[0] != std::floor(v[0])) throw std::invalid_argument("box side must be an integer");
    return box_constant(static_cast<int>(v[0]), v[1]);
  }
  throw std::invalid_argument("unknown profile '" + std::string(text) + "'");
}

std::string SpectrumProfile::spec() const {
  if (kind == Kind::power_decay) {
    return "power:" + format_double(amplitude) + "," + format_double(exponent);
  }
  return "box:" + std::to_string(side) + "," + format_double(amplitude);
}

double SpectrumProfile::lambda(WaveVector n) const {
  if (kind == Kind::power_decay) {
    return amplitude * std::pow(static_cast<double>(n.l1_norm()), -exponent);
  }
  return std::max(std::abs(n.n1), std::abs(n.n2)) <= side ? amplitude : 0.0;
}

SpectrumProfile normalize_profile(const SpectrumProfile& profile, const RandomLaw& law,
                                  const Lattice& lattice, double s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const WaveVector n = lattice.mode(i);
    const double lam = profile.lambda(n);
    sum += std::pow(static_cast<double>(n.l1_norm()), 2.0 * s) * lam * lam;
  }
  const double norm = law.r_max() * std::sqrt(sum);
  if (!(norm > 0.0)) throw std::invalid_argument("normalize_profile: profile vanishes on the box");
  SpectrumProfile out = profile;
  out.amplitude /= norm;
  return out;
}

cplx sample_g(const RandomLaw& law, std::uint64_t seed, std::uint64_t index, WaveVector n) {
  const std::uint64_t mode_key =
      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.n1)) << 32) |
      static_cast<std::uint32_t>(n.n2);
  std::uint64_t state = mix(seed ^ mix(index ^ 0x5851F42D4C957F2DULL) ^ mix(~mode_key));
  const double phase = 2.0 * std::numbers::pi * uniform(state);
  double r = law.a;
  switch (law.kind) {
    case RandomLaw::Kind::constant:
      break;
    case RandomLaw::Kind::two_point:
      r = uniform(state) < law.p ? law.b : law.a;
      break;
    case RandomLaw::Kind::clipped_gaussian:
      // Rayleigh draw: R^2 exponential with mean sigma^2.
      r = std::min(law.a * std::sqrt(-std::log1p(-uniform(state))), law.b);
      break;
  }
  return std::polar(r, phase);
}

SpectralField sample_u0(const SpectrumProfile& profile, const RandomLaw& law,
                        const LatticePtr& lattice, std::uint64_t seed, std::uint64_t index) {
  SpectralField u(lattice);
  for (std::size_t i = lattice->half_begin(); i < lattice->size(); ++i) {
    const WaveVector n = lattice->mode(i);
    u.set(i, profile.lambda(n) * sample_g(law, seed, index, n));
  }
  return u;
}

}  // namespace kpnf
