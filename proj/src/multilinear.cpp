#include "kpnf/multilinear.hpp"

namespace kpnf {

SpectralField dx_product(const SpectralField& u, const SpectralField& v) {
  require_same_box(u, v, "dx_product");
  const Lattice& lat = u.lattice();
  SpectralField out(u.lattice_ptr());
  for (std::size_t n = lat.half_begin(); n < lat.size(); ++n) {
    cplx acc{};
    for (const Triad& tr : lat.triads(n)) acc += u[tr.k] * v[tr.l];
    out.set(n, cplx{0.0, static_cast<double>(lat.mode(n).n1)} * acc);
  }
  return out;
}

SpectralField s_map(const SpectralField& u, const SpectralField& v) {
  require_same_box(u, v, "s_map");
  const Lattice& lat = u.lattice();
  SpectralField out(u.lattice_ptr());
  for (std::size_t n = lat.half_begin(); n < lat.size(); ++n) {
    cplx acc{};
    for (const Triad& tr : lat.triads(n)) acc += u[tr.k] * v[tr.l] / tr.delta;
    out.set(n, 0.5 * lat.mode(n).n1 * acc);
  }
  return out;
}

SpectralField f_map(const SpectralField& a, const SpectralField& b, const SpectralField& c) {
  require_same_box(a, b, "f_map");
  require_same_box(a, c, "f_map");
  SpectralField out = s_map(c, dx_product(a, b));
  out *= -1.0;
  return out;
}

SpectralField apply_L(const SpectralField& u) {
  const Lattice& lat = u.lattice();
  SpectralField out(u.lattice_ptr());
  for (std::size_t n = lat.half_begin(); n < lat.size(); ++n) {
    out.set(n, cplx{0.0, lat.omega(n)} * u[n]);
  }
  return out;
}

}  // namespace kpnf
