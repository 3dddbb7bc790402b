#include "kpnf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kpnf/errors.hpp"

namespace kpnf {

std::string WaveVector::str() const {
  return "(" + std::to_string(n1) + "," + std::to_string(n2) + ")";
}

double omega(WaveVector n) {
  if (n.n1 == 0) throw std::invalid_argument("omega: n1 = 0 is not a lattice mode");
  const double a = n.n1;
  const double b = n.n2;
  return a * a * a - (b * b) / a;
}

double delta(WaveVector n, WaveVector k, WaveVector l) {
  if (k + l != n) {
    throw std::invalid_argument("delta: k + l != n for n=" + n.str() + " k=" + k.str() +
                                " l=" + l.str());
  }
  return omega(k) + omega(l) - omega(n);
}

Lattice::Lattice(LatticeBox box) : box_(box) {
  if (box.N1 < 1 || box.N2 < 0) {
    throw std::invalid_argument("LatticeBox needs N1 >= 1 and N2 >= 0");
  }
  modes_.reserve(box.size());
  for (int n1 = -box.N1; n1 <= box.N1; ++n1) {
    if (n1 == 0) continue;
    for (int n2 = -box.N2; n2 <= box.N2; ++n2) modes_.push_back({n1, n2});
  }
  omega_.resize(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    omega_[i] = kpnf::omega(modes_[i]);
    max_abs_omega_ = std::max(max_abs_omega_, std::abs(omega_[i]));
  }

  triad_offsets_.assign(modes_.size() + 1, 0);
  for (std::size_t n = 0; n < modes_.size(); ++n) {
    triad_offsets_[n] = triads_.size();
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      const auto l = index(modes_[n] - modes_[k]);
      if (!l) continue;
      triads_.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(*l),
                         omega_[k] + omega_[*l] - omega_[n]});
    }
  }
  triad_offsets_[modes_.size()] = triads_.size();
}

std::optional<std::size_t> Lattice::index(WaveVector n) const {
  if (!box_.contains(n)) return std::nullopt;
  const std::size_t width = 2 * static_cast<std::size_t>(box_.N2) + 1;
  const std::size_t row = n.n1 < 0 ? static_cast<std::size_t>(n.n1 + box_.N1)
                                   : static_cast<std::size_t>(box_.N1 + n.n1 - 1);
  return row * width + static_cast<std::size_t>(n.n2 + box_.N2);
}

std::size_t Lattice::index_or_throw(WaveVector n) const {
  const auto i = index(n);
  if (!i) throw std::out_of_range("mode " + n.str() + " is outside the lattice box");
  return *i;
}

SpectralField::SpectralField(LatticePtr lattice)
    : lattice_(std::move(lattice)), coeffs_(lattice_->size()) {}

cplx SpectralField::at(WaveVector n) const {
  const auto i = lattice_->index(n);
  return i ? coeffs_[*i] : cplx{};
}

void SpectralField::set(std::size_t i, cplx z) {
  const std::size_t j = lattice_->negated(i);
  if (i >= lattice_->half_begin()) {
    coeffs_[i] = z;
    coeffs_[j] = std::conj(z);
  } else {
    coeffs_[j] = std::conj(z);
    coeffs_[i] = z;
  }
}

void SpectralField::set(WaveVector n, cplx z) { set(lattice_->index_or_throw(n), z); }

bool SpectralField::same_box(const SpectralField& other) const {
  return lattice_ == other.lattice_ || box() == other.box();
}

bool SpectralField::is_real_symmetric(double tol) const {
  for (std::size_t i = lattice_->half_begin(); i < coeffs_.size(); ++i) {
    if (std::abs(coeffs_[lattice_->negated(i)] - std::conj(coeffs_[i])) > tol) return false;
  }
  return true;
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

void require_same_box(const SpectralField& a, const SpectralField& b, const char* op) {
  if (!a.same_box(b)) {
    throw BoxMismatch(std::string(op) + ": fields live on different lattice boxes");
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_box(*this, other, "operator+=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_box(*this, other, "operator-=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double c) {
  for (auto& z : coeffs_) z *= c;
  return *this;
}

SpectralField& SpectralField::axpy(double c, const SpectralField& other) {
  require_same_box(*this, other, "axpy");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += c * other.coeffs_[i];
  return *this;
}

double hs_norm(const SpectralField& u, double s) {
  const Lattice& lat = u.lattice();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = std::pow(static_cast<double>(lat.mode(i).l1_norm()), 2.0 * s);
    sum += w * std::norm(u[i]);
  }
  return std::sqrt(sum);
}

double l2_energy(const SpectralField& u) {
  double sum = 0.0;
  for (const cplx z : u.coeffs()) sum += std::norm(z);
  return sum;
}

double max_abs(const SpectralField& u) {
  double m = 0.0;
  for (const cplx z : u.coeffs()) m = std::max(m, std::abs(z));
  return m;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  require_same_box(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double relative_diff(const SpectralField& a, const SpectralField& b) {
  const double scale = std::max(max_abs(a), max_abs(b));
  if (scale == 0.0) return 0.0;
  return max_abs_diff(a, b) / scale;
}

SpectralField apply_free_flow(const SpectralField& u, double t) {
  const Lattice& lat = u.lattice();
  SpectralField out(u.lattice_ptr());
  for (std::size_t i = lat.half_begin(); i < lat.size(); ++i) {
    out.set(i, std::polar(1.0, lat.omega(i) * t) * u[i]);
  }
  return out;
}

}  // namespace kpnf
