#include "kpnf/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kpnf {
namespace {

// (1 - cos(x t)) / x^2 without cancellation.
double one_minus_cos_sq(double x, double t) {
  const double h = std::sin(0.5 * x * t);
  return 2.0 * h * h / (x * x);
}

double sin_rate(double x, double t) { return std::sin(x * t) / x; }

double bound_sq(double x, double /*t*/) { return 2.0 / (x * x); }

// Shared shape of G_n and F_{n,n}: kernel(Delta, t) is sin(Dt)/D, (1-cos Dt)/D^2,
// or the majorant 2/D^2 (with `absolute` taking moduli of every coefficient).
template <class Kernel>
double diagonal_sum(const TheoryContext& ctx, WaveVector n, double t, Kernel kernel,
                    bool absolute) {
  const Lattice& lat = *ctx.lattice;
  const std::size_t ni = lat.index_or_throw(n);
  const double n1 = n.n1;
  const double pn = ctx.power[ni];
  auto mag = [absolute](double x) { return absolute ? std::abs(x) : x; };

  double generic = 0.0;
  for (const Triad& tr : lat.triads(ni)) {
    const double k1 = lat.mode(tr.k).n1;
    const double l1 = lat.mode(tr.l).n1;
    const double pk = ctx.power[tr.k];
    const double pl = ctx.power[tr.l];
    generic += kernel(tr.delta, t) * mag(k1 * pn * pl + l1 * pn * pk - n1 * pk * pl);
  }
  double total = mag(-n1 * ctx.m2 * ctx.m2) * generic;

  const double excess = ctx.kurtosis_excess();
  if (excess != 0.0) {
    const WaveVector twice{2 * n.n1, 2 * n.n2};
    if (lat.box().contains(twice)) {
      const double d = delta(n, -n, twice);
      total += mag(-2.0 * n1 * n1 * excess * pn * pn) * kernel(d, t);
    }
    if (n.n1 % 2 == 0 && n.n2 % 2 == 0) {
      const WaveVector half{n.n1 / 2, n.n2 / 2};
      const double ph = ctx.power_at(half);
      const double d = delta(n, half, half);
      total += mag(0.5 * n1 * n1 * excess * ph * ph) * kernel(d, t);
    }
  }
  return total;
}

bool zero_sum(WaveVector n, WaveVector m, WaveVector p) { return n + m + p == WaveVector{0, 0}; }

// Bracketed amplitude multiplying the time factor of F_{n,m,p}.
double triple_amplitude(const TheoryContext& ctx, WaveVector n, WaveVector m, WaveVector p,
                        TripleConvention conv) {
  const double pn = ctx.power_at(n);
  const double pm = ctx.power_at(m);
  const double pp = ctx.power_at(p);
  const double n1 = n.n1;
  const double m1 = m.n1;
  const double p1 = p.n1;
  const double cyclic = n1 * pm * pp + m1 * pp * pn + p1 * pn * pm;
  const double excess = ctx.kurtosis_excess();
  switch (conv) {
    case TripleConvention::derived:
      return ctx.m2 * ctx.m2 * cyclic +
             0.5 * excess *
                 ((m == p ? n1 * pm * pm : 0.0) + (p == n ? m1 * pp * pp : 0.0) +
                  (n == m ? p1 * pn * pn : 0.0));
    case TripleConvention::alt_repeated:
      return ctx.m2 * cyclic + excess * ((m == p ? m1 * pm * pm : 0.0) +
                                         (p == n ? p1 * pp * pp : 0.0) +
                                         (n == m ? n1 * pn * pn : 0.0));
    case TripleConvention::alt_distinct:
      return ctx.m2 * cyclic +
             0.5 * excess *
                 ((m == p ? n1 * pm * pm : 0.0) + (p == n ? m1 * pp * pp : 0.0) +
                  (n == m ? p1 * pn * pn : 0.0));
  }
  return 0.0;
}

double triple_sign(TripleConvention conv) {
  return conv == TripleConvention::derived ? 1.0 : -1.0;
}

// Calls fn(n, m, p) for every ordered zero-sum triple in the box.
template <class Fn>
void for_each_zero_sum_triple(const Lattice& lat, Fn fn) {
  for (std::size_t i = 0; i < lat.size(); ++i) {
    for (std::size_t j = 0; j < lat.size(); ++j) {
      const WaveVector n = lat.mode(i);
      const WaveVector m = lat.mode(j);
      const WaveVector p = -(n + m);
      if (lat.box().contains(p)) fn(n, m, p);
    }
  }
}

double triple_weight(WaveVector n, WaveVector m, WaveVector p, double s) {
  const double prod = std::pow(static_cast<double>(n.l1_norm()) * m.l1_norm() * p.l1_norm(), s);
  return std::sqrt(std::abs(static_cast<double>(n.n1) * m.n1 * p.n1)) * prod;
}

}  // namespace

TheoryContext TheoryContext::make(LatticePtr lattice, const SpectrumProfile& profile,
                                  GMoments g) {
  TheoryContext ctx{std::move(lattice), profile, g.m2, g.m4, {}};
  ctx.power.resize(ctx.lattice->size());
  for (std::size_t i = 0; i < ctx.power.size(); ++i) {
    const double lam = profile.lambda(ctx.lattice->mode(i));
    ctx.power[i] = lam * lam;
  }
  return ctx;
}

double TheoryContext::power_at(WaveVector n) const {
  const auto i = lattice->index(n);
  return i ? power[*i] : 0.0;
}

double g_n_rate(const TheoryContext& ctx, WaveVector n, double t) {
  return diagonal_sum(ctx, n, t, sin_rate, false);
}

double f2_diag(const TheoryContext& ctx, WaveVector n, double t) {
  return diagonal_sum(ctx, n, t, one_minus_cos_sq, false);
}

double f2(const TheoryContext& ctx, WaveVector n, WaveVector m, double t) {
  return n == m ? f2_diag(ctx, n, t) : 0.0;
}

TripleConvention parse_triple_convention(std::string_view text) {
  if (text == "derived") return TripleConvention::derived;
  if (text == "alt_repeated") return TripleConvention::alt_repeated;
  if (text == "alt_distinct") return TripleConvention::alt_distinct;
  throw std::invalid_argument("unknown triple convention '" + std::string(text) + "'");
}

const char* to_string(TripleConvention c) {
  switch (c) {
    case TripleConvention::derived:
      return "derived";
    case TripleConvention::alt_repeated:
      return "alt_repeated";
    case TripleConvention::alt_distinct:
      return "alt_distinct";
  }
  return "?";
}

cplx f3(const TheoryContext& ctx, WaveVector n, WaveVector m, WaveVector p, double t,
                       TripleConvention conv) {
  if (!zero_sum(n, m, p)) return {};
  const double big_omega = omega(n) + omega(m) + omega(p);
  // (1 - exp(i W t)) / W
  const double h = std::sin(0.5 * big_omega * t);
  const cplx factor{2.0 * h * h / big_omega, -std::sin(big_omega * t) / big_omega};
  return triple_sign(conv) * factor * triple_amplitude(ctx, n, m, p, conv);
}

cplx f3_gauged_rate(const TheoryContext& ctx, WaveVector n, WaveVector m, WaveVector p, double t,
                       TripleConvention conv) {
  if (!zero_sum(n, m, p)) return {};
  const double big_omega = omega(n) + omega(m) + omega(p);
  return -triple_sign(conv) * cplx{0.0, 1.0} * std::polar(1.0, -big_omega * t) *
         triple_amplitude(ctx, n, m, p, conv);
}

double weighted_sum_pair(const TheoryContext& ctx, double s, double t) {
  const Lattice& lat = *ctx.lattice;
  double sum = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const WaveVector n = lat.mode(i);
    sum += std::abs(n.n1) * std::pow(static_cast<double>(n.l1_norm()), 2.0 * s) *
           std::abs(f2_diag(ctx, n, t));
  }
  return sum;
}

double weighted_sum_pair_majorant(const TheoryContext& ctx, double s) {
  const Lattice& lat = *ctx.lattice;
  double sum = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const WaveVector n = lat.mode(i);
    sum += std::abs(n.n1) * std::pow(static_cast<double>(n.l1_norm()), 2.0 * s) *
           diagonal_sum(ctx, n, 0.0, bound_sq, true);
  }
  return sum;
}

double weighted_sum_triple(const TheoryContext& ctx, double s, double t, TripleConvention conv) {
  double sum = 0.0;
  for_each_zero_sum_triple(*ctx.lattice, [&](WaveVector n, WaveVector m, WaveVector p) {
    sum += triple_weight(n, m, p, s) * std::abs(f3(ctx, n, m, p, t, conv));
  });
  return sum;
}

double weighted_sum_triple_majorant(const TheoryContext& ctx, double s, TripleConvention conv) {
  double sum = 0.0;
  for_each_zero_sum_triple(*ctx.lattice, [&](WaveVector n, WaveVector m, WaveVector p) {
    const double big_omega = omega(n) + omega(m) + omega(p);
    sum += triple_weight(n, m, p, s) * 2.0 / std::abs(big_omega) *
           std::abs(triple_amplitude(ctx, n, m, p, conv));
  });
  return sum;
}

double box_limit_f2(WaveVector n, int side, double level, double t, double m2, double m4) {
  if (std::abs(m2 - 1.0) > 1e-12 || std::abs(m4 - 2.0) > 1e-12) {
    throw std::invalid_argument(
        "box_limit_f2: the flat-box limit needs E|g|^2 = 1 and E|g|^4 = 2 (m4 = 2 m2^2)");
  }
  if (side < 1) throw std::invalid_argument("box_limit_f2: side must be >= 1");
  auto inside = [side](WaveVector k) {
    return k.n1 != 0 && std::abs(k.n1) <= side && std::abs(k.n2) <= side;
  };
  if (!inside(n)) throw std::invalid_argument("box_limit_f2: n must lie in the box");

  const double l4 = level * level * level * level;
  const double n1 = n.n1;
  // Pairs with k outside and l inside mirror those with k inside and l outside.
  double sum = 0.0;
  for (int k1 = -side; k1 <= side; ++k1) {
    if (k1 == 0) continue;
    for (int k2 = -side; k2 <= side; ++k2) {
      const WaveVector k{k1, k2};
      const WaveVector l = n - k;
      if (l.n1 == 0) continue;
      const double coeff = inside(l) ? (k.n1 + l.n1 - n1) * l4 : 2.0 * l.n1 * l4;
      sum += one_minus_cos_sq(delta(n, k, l), t) * coeff;
    }
  }
  return -n1 * m2 * m2 * sum;
}

}  // namespace kpnf
