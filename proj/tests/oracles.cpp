#include "oracles.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace oracle {

using kpnf::Lattice;
using kpnf::LatticeBox;
using kpnf::omega;

namespace {

const cplx I{0.0, 1.0};

std::vector<WaveVector> box_modes(const LatticeBox& box) {
  std::vector<WaveVector> out;
  for (int a = -box.N1; a <= box.N1; ++a) {
    if (a == 0) continue;
    for (int b = -box.N2; b <= box.N2; ++b) out.push_back({a, b});
  }
  return out;
}

double lam(const kpnf::SpectrumProfile& prof, WaveVector n) { return prof.lambda(n); }

}  // namespace

SpectralField direct_f(const SpectralField& a, const SpectralField& b, const SpectralField& c) {
  const LatticeBox box = a.box();
  const auto modes = box_modes(box);
  SpectralField out(a.lattice_ptr());
  for (const WaveVector n : modes) {
    if (n.n1 < 0) continue;
    cplx acc{};
    for (const WaveVector j : modes) {
      for (const WaveVector k : modes) {
        const WaveVector m = j + k;
        const WaveVector l = n - m;
        if (!box.contains(m) || !box.contains(l)) continue;
        const double d = omega(l) + omega(m) - omega(n);
        acc += I * static_cast<double>(m.n1) * a.at(j) * b.at(k) * c.at(l) / d;
      }
    }
    out.set(n, -0.5 * n.n1 * acc);
  }
  return out;
}

CVec integrate_vector(const std::function<CVec(double)>& f, double a, double b, double tol,
                      int max_panels) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  const auto& x = GL::abscissa();
  const auto& w = GL::weights();
  auto composite = [&](int panels) {
    CVec sum;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * h;
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (const double sgn : {-1.0, 1.0}) {
          const CVec v = f(mid + sgn * 0.5 * h * x[i]);
          if (sum.empty()) sum.assign(v.size(), cplx{});
          for (std::size_t k = 0; k < v.size(); ++k) sum[k] += 0.5 * h * w[i] * v[k];
        }
      }
    }
    return sum;
  };
  int panels = 4;
  CVec prev = composite(panels);
  while (panels < max_panels) {
    panels *= 2;
    CVec next = composite(panels);
    double diff = 0.0;
    double scale = 1e-300;
    for (std::size_t k = 0; k < next.size(); ++k) {
      diff = std::max(diff, std::abs(next[k] - prev[k]));
      scale = std::max(scale, std::abs(next[k]));
    }
    prev = std::move(next);
    if (diff <= tol * scale) return prev;
  }
  throw std::runtime_error("integrate_vector: no convergence");
}

CVec rk4(const std::function<CVec(double, const CVec&)>& f, CVec y, double t_end, int steps) {
  const double h = t_end / steps;
  auto axpy = [](const CVec& y0, double c, const CVec& k) {
    CVec r = y0;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * k[i];
    return r;
  };
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const CVec k1 = f(t, y);
    const CVec k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const CVec k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const CVec k4 = f(t + h, axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return y;
}

PicardOde picard_by_ode(const SpectralField& u0, double t, int steps) {
  const LatticeBox box = u0.box();
  const auto modes = box_modes(box);
  const std::size_t n_modes = modes.size();
  std::map<WaveVector, std::size_t> where;
  for (std::size_t i = 0; i < n_modes; ++i) where[modes[i]] = i;

  auto conv = [&](const CVec& x, const CVec& y, std::size_t n) {
    cplx acc{};
    for (std::size_t k = 0; k < n_modes; ++k) {
      const auto it = where.find(modes[n] - modes[k]);
      if (it != where.end()) acc += x[k] * y[it->second];
    }
    return acc;
  };

  auto rhs = [&](double s, const CVec& y) {
    CVec a(n_modes);
    for (std::size_t i = 0; i < n_modes; ++i) {
      a[i] = std::exp(I * omega(modes[i]) * s) * u0.at(modes[i]);
    }
    const CVec b(y.begin(), y.begin() + static_cast<long>(n_modes));
    CVec out(2 * n_modes);
    for (std::size_t i = 0; i < n_modes; ++i) {
      const double w = omega(modes[i]);
      const double n1 = modes[i].n1;
      out[i] = I * w * y[i] - 0.5 * I * n1 * conv(a, a, i);
      out[n_modes + i] = I * w * y[n_modes + i] - I * n1 * conv(a, b, i);
    }
    return out;
  };

  const CVec y = rk4(rhs, CVec(2 * n_modes), t, steps);
  PicardOde res{SpectralField(u0.lattice_ptr()), SpectralField(u0.lattice_ptr())};
  for (std::size_t i = 0; i < n_modes; ++i) {
    if (modes[i].n1 < 0) continue;
    res.b.set(modes[i], y[i]);
    res.c.set(modes[i], y[n_modes + i]);
  }
  return res;
}

double pairing_expectation(const std::vector<Factor>& factors,
                           const std::vector<double>& even_moments) {
  std::map<WaveVector, std::pair<int, int>> classes;
  for (const Factor& f : factors) {
    const bool flipped = f.n.n1 < 0;
    const WaveVector v = flipped ? -f.n : f.n;
    const bool is_conj = flipped != f.conj;
    auto& c = classes[v];
    (is_conj ? c.second : c.first) += 1;
  }
  double e = 1.0;
  for (const auto& [v, c] : classes) {
    if (c.first != c.second) return 0.0;
    const std::size_t j = static_cast<std::size_t>(c.first);
    if (j > even_moments.size()) throw std::out_of_range("pairing: moment not supplied");
    e *= even_moments[j - 1];
  }
  return e;
}

Poly picard_a_poly(const Lattice&, const kpnf::SpectrumProfile& prof, WaveVector n, double t) {
  return {{std::exp(I * omega(n) * t) * lam(prof, n), {n}}};
}

Poly picard_b_poly(const Lattice& lat, const kpnf::SpectrumProfile& prof, WaveVector n,
                   double t) {
  Poly out;
  const LatticeBox box = lat.box();
  for (const WaveVector k : box_modes(box)) {
    const WaveVector l = n - k;
    if (!box.contains(l)) continue;
    const double d = omega(k) + omega(l) - omega(n);
    // int_0^t exp(i w_n (t - s)) exp(i (w_k + w_l) s) ds
    const cplx time = std::exp(I * omega(n) * t) * (std::exp(I * d * t) - 1.0) / (I * d);
    out.push_back({-0.5 * I * static_cast<double>(n.n1) * lam(prof, k) * lam(prof, l) * time,
                   {k, l}});
  }
  return out;
}

Poly picard_c_poly(const Lattice& lat, const kpnf::SpectrumProfile& prof, WaveVector n,
                   double t) {
  struct Raw {
    WaveVector k, j, q, l;
    double pref;
  };
  std::vector<Raw> raw;
  const LatticeBox box = lat.box();
  const auto modes = box_modes(box);
  for (const WaveVector k : modes) {
    const WaveVector l = n - k;
    if (!box.contains(l)) continue;
    for (const WaveVector j : modes) {
      const WaveVector q = l - j;
      if (!box.contains(q)) continue;
      // (-i n1) * (-i l1 / 2) = -(n1 l1) / 2
      raw.push_back({k, j, q, l, -0.5 * n.n1 * l.n1 * lam(prof, k) * lam(prof, j) * lam(prof, q)});
    }
  }
  auto integrand = [&](double s) {
    CVec v(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const Raw& r = raw[i];
      const double dl = omega(r.j) + omega(r.q) - omega(r.l);
      // b_l(s) per unit coefficient: exp(i w_l s) (exp(i dl s) - 1) / (i dl)
      const cplx b_time = std::exp(I * omega(r.l) * s) * (std::exp(I * dl * s) - 1.0) / (I * dl);
      v[i] = std::exp(I * omega(n) * (t - s)) * std::exp(I * omega(r.k) * s) * b_time;
    }
    return v;
  };
  const CVec times = raw.empty() ? CVec{} : integrate_vector(integrand, 0.0, t, 1e-13);
  Poly out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.push_back({raw[i].pref * times[i], {raw[i].k, raw[i].j, raw[i].q}});
  }
  return out;
}

cplx expect_product(const Poly& x, const Poly& y, bool conj_y, const std::vector<double>& moments) {
  cplx acc{};
  std::vector<Factor> f;
  for (const Term& tx : x) {
    for (const Term& ty : y) {
      f.clear();
      for (const auto& m : tx.modes) f.push_back({m, false});
      for (const auto& m : ty.modes) f.push_back({m, conj_y});
      const double e = pairing_expectation(f, moments);
      if (e != 0.0) acc += tx.coeff * (conj_y ? std::conj(ty.coeff) : ty.coeff) * e;
    }
  }
  return acc;
}

cplx expect_triple(const Poly& x, const Poly& y, const Poly& z, const std::vector<double>& moments) {
  cplx acc{};
  std::vector<Factor> f;
  for (const Term& tx : x) {
    for (const Term& ty : y) {
      for (const Term& tz : z) {
        f.clear();
        for (const auto& m : tx.modes) f.push_back({m, false});
        for (const auto& m : ty.modes) f.push_back({m, false});
        for (const auto& m : tz.modes) f.push_back({m, false});
        const double e = pairing_expectation(f, moments);
        if (e != 0.0) acc += tx.coeff * ty.coeff * tz.coeff * e;
      }
    }
  }
  return acc;
}

double pair_correction(const Lattice& lat, const kpnf::SpectrumProfile& prof, WaveVector n,
                       double t, const std::vector<double>& moments) {
  const Poly a = picard_a_poly(lat, prof, n, t);
  const Poly b = picard_b_poly(lat, prof, n, t);
  const Poly c = picard_c_poly(lat, prof, n, t);
  const cplx bb = expect_product(b, b, true, moments);
  const cplx ac = expect_product(a, c, true, moments);
  return bb.real() + 2.0 * ac.real();
}

cplx triple_correction(const Lattice& lat, const kpnf::SpectrumProfile& prof, WaveVector n,
                       WaveVector m, WaveVector p, double t, const std::vector<double>& moments) {
  const Poly an = picard_a_poly(lat, prof, n, t);
  const Poly am = picard_a_poly(lat, prof, m, t);
  const Poly ap = picard_a_poly(lat, prof, p, t);
  const Poly bn = picard_b_poly(lat, prof, n, t);
  const Poly bm = picard_b_poly(lat, prof, m, t);
  const Poly bp = picard_b_poly(lat, prof, p, t);
  return expect_triple(bn, am, ap, moments) + expect_triple(an, bm, ap, moments) +
         expect_triple(an, am, bp, moments);
}

SpectralField random_field(const kpnf::LatticePtr& lat, unsigned seed, double scale) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  SpectralField u(lat);
  for (std::size_t i = lat->half_begin(); i < lat->size(); ++i) {
    cplx z;
    do {
      z = {unit(gen), unit(gen)};
    } while (std::norm(z) > 1.0);
    u.set(i, scale * z);
  }
  return u;
}

}  // namespace oracle
