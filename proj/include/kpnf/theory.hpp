#pragma once

// Closed-form leading corrections to the second and third moments of the
// random truncated flow:
//   E(u_n conj u_m) = delta_nm m2 |lambda_n|^2 + eps^2 F_{n,m}(t) + O(eps^4)
//   E(u_n u_m u_p)  = eps F_{n,m,p}(t) + O(eps^3)
// All mode sums are restricted to the lattice box.

#include "kpnf/lattice.hpp"
#include "kpnf/random_data.hpp"

namespace kpnf {

struct TheoryContext {
  LatticePtr lattice;
  SpectrumProfile profile;
  double m2 = 1.0;
  double m4 = 1.0;
  std::vector<double> power;  // |lambda_n|^2 per mode index

  static TheoryContext make(LatticePtr lattice, const SpectrumProfile& profile, GMoments g);

  /// |lambda_n|^2, zero outside the box.
  double power_at(WaveVector n) const;
  double kurtosis_excess() const { return m4 - 2.0 * m2 * m2; }
};

/// G_n(t) = d/dt F_{n,n}(t).
double g_n_rate(const TheoryContext& ctx, WaveVector n, double t);

/// F_{n,n}(t) = int_0^t G_n.
double f2_diag(const TheoryContext& ctx, WaveVector n, double t);

/// F_{n,m}(t); zero off the diagonal.
double f2(const TheoryContext& ctx, WaveVector n, WaveVector m, double t);

/// Which form of the cubic correction to evaluate. The two alternatives are
/// sign and weight variants kept for comparison; only `derived` matches the
/// paired expectation.
///   derived      : the form obtained by pairing E(b a a + a b a + a a b).
///   alt_repeated : overall minus sign, E|g|^2 in the generic term and the
///                  Kronecker terms weighted by the repeated index, no 1/2.
///   alt_distinct : overall minus sign, E|g|^2 in the generic term, and the
///                  Kronecker terms weighted by the distinct index with 1/2.
enum class TripleConvention { derived, alt_repeated, alt_distinct };

TripleConvention parse_triple_convention(std::string_view text);
const char* to_string(TripleConvention c);

/// F_{n,m,p}(t); zero unless n + m + p = 0.
cplx f3(const TheoryContext& ctx, WaveVector n, WaveVector m, WaveVector p, double t,
        TripleConvention conv = TripleConvention::derived);

/// d/dt [exp(-i Omega t) F_{n,m,p}(t)] with Omega = omega_n + omega_m + omega_p.
cplx f3_gauged_rate(const TheoryContext& ctx, WaveVector n, WaveVector m, WaveVector p, double t,
        TripleConvention conv = TripleConvention::derived);

/// sum_n |n1| |n|^{2s} |F_{n,n}(t)|
double weighted_sum_pair(const TheoryContext& ctx, double s, double t);
/// Same sum with every oscillating factor replaced by its maximum modulus 2
/// and every summand by its absolute value; a time-independent bound.
double weighted_sum_pair_majorant(const TheoryContext& ctx, double s);

/// sum over ordered zero-sum triples of sqrt|n1 m1 p1| |n|^s |m|^s |p|^s |F_{n,m,p}(t)|
double weighted_sum_triple(const TheoryContext& ctx, double s, double t,
                           TripleConvention conv = TripleConvention::derived);
double weighted_sum_triple_majorant(const TheoryContext& ctx, double s,
                                    TripleConvention conv = TripleConvention::derived);

/// F_{n,n}(t) on the infinite lattice for the flat profile lambda_k = level
/// when max(|k1|,|k2|) <= side and 0 otherwise. Requires m2 = 1 and m4 = 2.
/// Pairs with both k and l inside the box contribute k1 + l1 - n1 = 0 and are
/// kept in the sum so the cancellation happens numerically.
double box_limit_f2(WaveVector n, int side, double level, double t, double m2, double m4);

}  // namespace kpnf
