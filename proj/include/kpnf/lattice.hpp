#pragma once

// Wave-vector lattice of the truncated KP-II system on T^2.
//
// Modes are (n1, n2) with 1 <= |n1| <= N1 and |n2| <= N2. The n1 = 0 column
// is excluded structurally (mean zero in x). Fields are real, so every
// coefficient satisfies u_{-n} = conj(u_n) and only the n1 > 0 half carries
// independent data.

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kpnf {

using cplx = std::complex<double>;

/// Sobolev index used when a caller does not pick one (s > 1).
inline constexpr double kDefaultSobolevIndex = 1.5;

struct WaveVector {
  int n1 = 1;
  int n2 = 0;

  friend constexpr WaveVector operator-(WaveVector v) { return {-v.n1, -v.n2}; }
  friend constexpr WaveVector operator+(WaveVector a, WaveVector b) {
    return {a.n1 + b.n1, a.n2 + b.n2};
  }
  friend constexpr WaveVector operator-(WaveVector a, WaveVector b) {
    return {a.n1 - b.n1, a.n2 - b.n2};
  }
  friend constexpr auto operator<=>(const WaveVector&, const WaveVector&) = default;

  /// |n| = |n1| + |n2|
  constexpr int l1_norm() const { return (n1 < 0 ? -n1 : n1) + (n2 < 0 ? -n2 : n2); }
  std::string str() const;
};

/// Dispersion relation omega_n = n1^3 - n2^2 / n1. Throws std::invalid_argument for n1 = 0.
double omega(WaveVector n);

/// Three-wave frequency omega_k + omega_l - omega_n for k + l = n.
/// Throws std::invalid_argument when k + l != n or a first component vanishes.
double delta(WaveVector n, WaveVector k, WaveVector l);

struct LatticeBox {
  int N1 = 1;
  int N2 = 0;

  bool contains(WaveVector n) const {
    return n.n1 != 0 && std::abs(n.n1) <= N1 && std::abs(n.n2) <= N2;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(2 * N1) * static_cast<std::size_t>(2 * N2 + 1);
  }
  friend bool operator==(const LatticeBox&, const LatticeBox&) = default;
};

/// k + l = n with all three in the box; k and l are mode indices.
struct Triad {
  std::uint32_t k;
  std::uint32_t l;
  double delta;
};

/// Immutable box + dispersion table + triad lists. Shared read-only by every
/// field living on the box.
class Lattice {
 public:
  explicit Lattice(LatticeBox box);

  static std::shared_ptr<const Lattice> make(LatticeBox box) {
    return std::make_shared<const Lattice>(box);
  }

  const LatticeBox& box() const { return box_; }
  std::size_t size() const { return modes_.size(); }

  /// Modes with n1 > 0 occupy [half_begin(), size()).
  std::size_t half_begin() const { return size() / 2; }

  WaveVector mode(std::size_t i) const { return modes_[i]; }
  std::optional<std::size_t> index(WaveVector n) const;
  std::size_t index_or_throw(WaveVector n) const;
  std::size_t negated(std::size_t i) const { return size() - 1 - i; }

  double omega(std::size_t i) const { return omega_[i]; }
  std::span<const double> omegas() const { return omega_; }
  double max_abs_omega() const { return max_abs_omega_; }

  /// All (k, l) in the box with k + l = mode(n).
  std::span<const Triad> triads(std::size_t n) const {
    return {triads_.data() + triad_offsets_[n], triad_offsets_[n + 1] - triad_offsets_[n]};
  }

 private:
  LatticeBox box_;
  std::vector<WaveVector> modes_;
  std::vector<double> omega_;
  std::vector<std::size_t> triad_offsets_;
  std::vector<Triad> triads_;
  double max_abs_omega_ = 0.0;
};

using LatticePtr = std::shared_ptr<const Lattice>;

/// Complex Fourier coefficients on a lattice box with reality symmetry.
///
/// Every mutation goes through `set`, which writes the conjugate partner too,
/// so the symmetry holds exactly rather than up to rounding.
class SpectralField {
 public:
  explicit SpectralField(LatticePtr lattice);

  const LatticePtr& lattice_ptr() const { return lattice_; }
  const Lattice& lattice() const { return *lattice_; }
  const LatticeBox& box() const { return lattice_->box(); }
  std::size_t size() const { return coeffs_.size(); }

  cplx operator[](std::size_t i) const { return coeffs_[i]; }
  /// Coefficient at n, or 0 when n lies outside the box.
  cplx at(WaveVector n) const;
  std::span<const cplx> coeffs() const { return coeffs_; }

  void set(std::size_t i, cplx z);
  void set(WaveVector n, cplx z);

  bool same_box(const SpectralField& other) const;
  bool is_real_symmetric(double tol = 0.0) const;
  bool all_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double c);
  /// this += c * other
  SpectralField& axpy(double c, const SpectralField& other);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double c, SpectralField a) { return a *= c; }
  friend SpectralField operator*(SpectralField a, double c) { return a *= c; }

 private:
  LatticePtr lattice_;
  std::vector<cplx> coeffs_;
};

/// Throws BoxMismatch unless both fields share a box.
void require_same_box(const SpectralField& a, const SpectralField& b, const char* op);

/// sqrt(sum |n|^{2s} |u_n|^2) with |n| = |n1| + |n2|.
double hs_norm(const SpectralField& u, double s);

/// sum |u_n|^2, the conserved quadratic invariant of the truncated flow.
double l2_energy(const SpectralField& u);

double max_abs(const SpectralField& u);
double max_abs_diff(const SpectralField& a, const SpectralField& b);
/// max|a - b| / max(max|a|, max|b|); 0 when both vanish.
double relative_diff(const SpectralField& a, const SpectralField& b);

/// Free flow U(t): u_n -> exp(i omega_n t) u_n.
SpectralField apply_free_flow(const SpectralField& u, double t);

}  // namespace kpnf
