#pragma once

// Multilinear maps of the truncated system. All convolution sums run over
// k + l = n with k, l and n in the box (Galerkin projection after the product).

#include "kpnf/lattice.hpp"

namespace kpnf {

/// (dx P(u v))_n = i n1 sum_{k+l=n} u_k v_l. No factor 1/2.
SpectralField dx_product(const SpectralField& u, const SpectralField& v);

/// Normal-form bilinear map, S(u,v)_n = (n1/2) sum_{k+l=n} u_k v_l / Delta_n^{k,l}.
/// Symmetric; the resonance bound |Delta| >= 3|n1 k1 l1| keeps it well defined.
SpectralField s_map(const SpectralField& u, const SpectralField& v);

/// Trilinear source of the normal-form equation, F(a,b,c) = -S(c, dx P(a b)).
SpectralField f_map(const SpectralField& a, const SpectralField& b, const SpectralField& c);

/// Linear part L: multiplies coefficient n by i omega_n.
SpectralField apply_L(const SpectralField& u);

}  // namespace kpnf
