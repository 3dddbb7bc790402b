#include "kpnf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include "json.hpp"

#include "kpnf/errors.hpp"
#include "kpnf/galerkin.hpp"
#include "kpnf/io.hpp"
#include "kpnf/multilinear.hpp"
#include "kpnf/picard.hpp"

namespace kpnf {

using json = nlohmann::json;

namespace {

// Fields for the identity checks: decaying random coefficients, deterministic in (seed, index).
SpectralField test_field(const LatticePtr& lat, std::uint64_t seed, std::uint64_t index) {
  const RandomLaw law = RandomLaw::clipped_gaussian(1.0, 3.0);
  const SpectrumProfile prof =
      normalize_profile(SpectrumProfile::power_decay(1.0, 3.0), law, *lat, kDefaultSobolevIndex);
  return sample_u0(prof, law, lat, seed, index);
}

// F(a,b,c)_n written as one sum over (l, j) with m = n - l and k = m - j.
SpectralField direct_trilinear(const SpectralField& a, const SpectralField& b,
                               const SpectralField& c) {
  const Lattice& lat = a.lattice();
  const LatticeBox box = lat.box();
  SpectralField out(a.lattice_ptr());
  for (std::size_t in = lat.half_begin(); in < lat.size(); ++in) {
    const WaveVector n = lat.mode(in);
    cplx sum{};
    for (std::size_t il = 0; il < lat.size(); ++il) {
      const WaveVector l = lat.mode(il);
      const WaveVector m = n - l;
      if (!box.contains(m)) continue;
      const double dl = delta(n, l, m);
      for (std::size_t ij = 0; ij < lat.size(); ++ij) {
        const WaveVector j = lat.mode(ij);
        const WaveVector k = m - j;
        if (!box.contains(k)) continue;
        sum += cplx{0.0, static_cast<double>(m.n1)} * a[ij] * b.at(k) * c[il] / dl;
      }
    }
    out.set(in, -0.5 * n.n1 * sum);
  }
  return out;
}

std::vector<std::string> config_comments(const ExperimentConfig& cfg) {
  std::vector<std::string> out{"format_version=" + std::to_string(kFormatVersion)};
  for (const auto& [k, v] : cfg.entries()) out.push_back(k + "=" + v);
  return out;
}

void write_comments(std::ostream& os, const ExperimentConfig& cfg) {
  for (const auto& line : config_comments(cfg)) os << "# " << line << '\n';
}

json config_json(const ExperimentConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

void write_json(std::ostream& os, const ExperimentConfig& cfg, json results) {
  json doc;
  doc["config"] = config_json(cfg);
  doc["results"] = std::move(results);
  doc["version"] = kFormatVersion;
  os << doc.dump(2) << '\n';
}

json fit_json(const SlopeFit& f) {
  return {{"fitted", f.fitted}, {"slope", f.slope},     {"intercept", f.intercept},
          {"half_width", f.half_width}, {"points", f.points}, {"note", f.note}};
}

std::string fit_text(const SlopeFit& f) {
  if (!f.fitted) return f.note;
  return format_double(f.slope) + " +- " + format_double(f.half_width);
}

std::vector<ModeTriple> zero_sum_triples(const Lattice& lat) {
  std::vector<ModeTriple> out;
  for (const auto& tr : default_triples(lat)) {
    if (tr[0] + tr[1] + tr[2] == WaveVector{0, 0}) out.push_back(tr);
  }
  return out;
}

std::string mode_cells(const WaveVector& n) { return std::to_string(n.n1) + ',' + std::to_string(n.n2); }

// ---- commands ----

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  const auto checks = verify_identities(cfg.box, cfg.fields, cfg.seed, cfg.tolerance, cfg.s);
  bool ok = true;
  for (const auto& c : checks) ok = ok && c.pass;
  if (cfg.format == OutputFormat::json) {
    json rows = json::array();
    for (const auto& c : checks) {
      rows.push_back({{"identity", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance},
                      {"trials", c.trials}, {"pass", c.pass}});
    }
    write_json(out, cfg, {{"checks", rows}, {"pass", ok}});
  } else {
    write_comments(out, cfg);
    out << "identity,residual,tolerance,trials,pass\n";
    for (const auto& c : checks) {
      out << c.name << ',' << format_double(c.residual) << ',' << format_double(c.tolerance) << ','
          << c.trials << ',' << (c.pass ? "pass" : "FAIL") << '\n';
    }
  }
  for (const auto& c : checks) {
    log << (c.pass ? "pass " : "FAIL ") << c.name << "  max residual " << c.residual << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream&) {
  const LatticePtr lat = Lattice::make(cfg.box);
  const SpectralField u0 = sample_u0(effective_profile(cfg, *lat), cfg.law, lat, cfg.seed, 0);
  const Trajectory tr = integrate(u0, cfg.eps, cfg.t, {cfg.dt, cfg.record_stride});
  if (cfg.format == OutputFormat::json) {
    json states = json::array();
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      json modes = json::array();
      for (std::size_t k = 0; k < lat->size(); ++k) {
        const WaveVector n = lat->mode(k);
        modes.push_back({n.n1, n.n2, tr.states[i][k].real(), tr.states[i][k].imag()});
      }
      states.push_back({{"t", tr.times[i]}, {"modes", modes}});
    }
    write_json(out, cfg, {{"dt", tr.dt}, {"states", states}});
  } else {
    write_comments(out, cfg);
    out << "# dt=" << format_double(tr.dt) << '\n';
    write_trajectory_csv(out, tr);
  }
  return 0;
}

int cmd_ensemble(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  const EnsembleConfig ecfg = ensemble_config(cfg);
  const MomentReport rep = estimate_moments(ecfg);
  if (cfg.format == OutputFormat::json) {
    json rows = json::array();
    auto add = [&](const MomentEntry& e) {
      json modes = json::array();
      const int count = e.kind == MomentEntry::Kind::pair ? 2 : 3;
      for (int i = 0; i < count; ++i) modes.push_back({e.modes[i].n1, e.modes[i].n2});
      rows.push_back({{"kind", e.kind == MomentEntry::Kind::pair ? "pair" : "triple"},
                      {"modes", modes},
                      {"estimate", {e.estimate.real(), e.estimate.imag()}},
                      {"se", e.se},
                      {"prediction", {e.prediction.real(), e.prediction.imag()}},
                      {"z", e.z}});
    };
    for (const auto& e : rep.pairs) add(e);
    for (const auto& e : rep.triples) add(e);
    json failed = json::array();
    for (const auto i : rep.failed_samples) failed.push_back(i);
    write_json(out, cfg,
               {{"samples", rep.sample_count}, {"requested", rep.requested},
                {"failed_samples", failed}, {"dt", rep.dt}, {"entries", rows}});
  } else {
    std::vector<std::string> comments = config_comments(cfg);
    comments.push_back("samples_completed=" + std::to_string(rep.sample_count));
    comments.push_back("samples_failed=" + std::to_string(rep.failed_samples.size()));
    comments.push_back("dt_used=" + format_double(rep.dt));
    write_report_csv(out, rep, comments);
  }
  double zmax = 0.0;
  for (const auto& e : rep.pairs) zmax = std::max(zmax, e.z);
  for (const auto& e : rep.triples) zmax = std::max(zmax, e.z);
  log << "ensemble: " << rep.sample_count << " samples, " << rep.failed_samples.size()
      << " failed, max z " << zmax << '\n';
  return 0;
}

int cmd_remainder_scan(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  const RemainderScanResult r = remainder_scan(cfg);
  if (cfg.format == OutputFormat::json) {
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"eps", row.eps},
                      {"pair_remainder", row.pair_remainder},
                      {"pair_se", row.pair_se},
                      {"pair_noise_dominated", row.pair_noise},
                      {"triple_remainder", row.triple_remainder},
                      {"triple_se", row.triple_se},
                      {"triple_noise_dominated", row.triple_noise}});
    }
    json growth = json::array();
    for (const auto& g : r.growth) growth.push_back({{"t", g.t}, {"max_norm", g.max_norm}});
    write_json(out, cfg,
               {{"rows", rows}, {"pair_fit", fit_json(r.pair_fit)},
                {"triple_fit", fit_json(r.triple_fit)}, {"dt", r.dt}, {"growth", growth},
                {"growth_fit", fit_json(r.growth_fit)}, {"samples", r.samples},
                {"failed", r.failed}});
  } else {
    write_comments(out, cfg);
    out << "# dt_used=" << format_double(r.dt) << '\n';
    out << "# samples_failed=" << r.failed << '\n';
    out << "# pair_slope=" << fit_text(r.pair_fit) << '\n';
    out << "# triple_slope=" << fit_text(r.triple_fit) << '\n';
    out << "# growth_exponent=" << fit_text(r.growth_fit) << '\n';
    out << "kind,x,value,se,noise_dominated\n";
    for (const auto& row : r.rows) {
      out << "pair," << format_double(row.eps) << ',' << format_double(row.pair_remainder) << ','
          << format_double(row.pair_se) << ',' << (row.pair_noise ? 1 : 0) << '\n';
      out << "triple," << format_double(row.eps) << ',' << format_double(row.triple_remainder)
          << ',' << format_double(row.triple_se) << ',' << (row.triple_noise ? 1 : 0) << '\n';
    }
    for (const auto& g : r.growth) {
      out << "d_growth," << format_double(g.t) << ',' << format_double(g.max_norm) << ",,0\n";
    }
  }
  log << "pair remainder slope: " << fit_text(r.pair_fit) << '\n'
      << "triple remainder slope: " << fit_text(r.triple_fit) << '\n'
      << "d growth exponent: " << fit_text(r.growth_fit) << '\n';
  return 0;
}

int cmd_box_limit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  const BoxLimitResult r = box_limit(cfg);
  if (cfg.format == OutputFormat::json) {
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"N", row.side}, {"level", row.level}, {"F", row.value}, {"ratio", row.ratio}});
    }
    write_json(out, cfg,
               {{"rows", rows}, {"spread", r.spread}, {"bounded", r.bounded},
                {"monotone", r.monotone}});
  } else {
    write_comments(out, cfg);
    out << "# spread=" << format_double(r.spread) << '\n';
    out << "# monotone=" << (r.monotone ? "true" : "false") << '\n';
    out << "N,level,F,ratio\n";
    for (const auto& row : r.rows) {
      out << row.side << ',' << format_double(row.level) << ',' << format_double(row.value) << ','
          << format_double(row.ratio) << '\n';
    }
  }
  log << "box-limit: ratio spread " << r.spread << " (allowed " << cfg.max_spread << "), "
      << (r.monotone ? "monotone" : "not monotone") << '\n';
  return r.bounded ? 0 : 1;
}

int cmd_theory_curves(const ExperimentConfig& cfg, std::ostream& out, std::ostream&) {
  const LatticePtr lat = Lattice::make(cfg.box);
  const TheoryContext ctx = TheoryContext::make(lat, effective_profile(cfg, *lat), cfg.law.moments());
  const auto triples = zero_sum_triples(*lat);
  const double pair_major = weighted_sum_pair_majorant(ctx, cfg.s);
  const double triple_major = weighted_sum_triple_majorant(ctx, cfg.s, cfg.convention);

  json rows = json::array();
  const bool as_json = cfg.format == OutputFormat::json;
  if (!as_json) {
    write_comments(out, cfg);
    out << "kind,n1,n2,m1,m2,p1,p2,t,re,im\n";
  }
  auto emit = [&](const std::string& kind, const std::string& modes, double t, cplx v) {
    if (as_json) {
      rows.push_back({{"kind", kind}, {"modes", modes}, {"t", t}, {"re", v.real()}, {"im", v.imag()}});
    } else {
      out << kind << ',' << modes << ',' << format_double(t) << ',' << format_double(v.real())
          << ',' << format_double(v.imag()) << '\n';
    }
  };
  for (const double t : cfg.t_grid) {
    for (std::size_t i = lat->half_begin(); i < lat->size(); ++i) {
      const WaveVector n = lat->mode(i);
      emit("pair", mode_cells(n) + ",,,,", t, f2_diag(ctx, n, t));
    }
    for (const auto& tr : triples) {
      emit("triple", mode_cells(tr[0]) + ',' + mode_cells(tr[1]) + ',' + mode_cells(tr[2]), t,
           f3(ctx, tr[0], tr[1], tr[2], t, cfg.convention));
    }
    emit("weighted_pair", ",,,,,", t, weighted_sum_pair(ctx, cfg.s, t));
    emit("weighted_pair_majorant", ",,,,,", t, pair_major);
    emit("weighted_triple", ",,,,,", t, weighted_sum_triple(ctx, cfg.s, t, cfg.convention));
    emit("weighted_triple_majorant", ",,,,,", t, triple_major);
  }
  if (as_json) write_json(out, cfg, {{"curves", rows}});
  return 0;
}

}  // namespace

SpectrumProfile effective_profile(const ExperimentConfig& cfg, const Lattice& lattice) {
  return cfg.normalize ? normalize_profile(cfg.profile, cfg.law, lattice, cfg.s) : cfg.profile;
}

std::vector<IdentityCheck> verify_identities(LatticeBox box, int fields, std::uint64_t seed,
                                             double tolerance, double s) {
  const LatticePtr lat = Lattice::make(box);
  std::vector<IdentityCheck> out;

  {
    IdentityCheck c{"resonance_bound", 0.0, 0.0, 0, true};
    for (std::size_t n = 0; n < lat->size(); ++n) {
      for (const Triad& tr : lat->triads(n)) {
        const double bound = 3.0 * std::abs(static_cast<double>(lat->mode(n).n1) *
                                            lat->mode(tr.k).n1 * lat->mode(tr.l).n1);
        c.residual = std::max(c.residual, (bound - std::abs(tr.delta)) / bound);
        ++c.trials;
      }
    }
    c.residual = std::max(c.residual, 0.0);
    c.tolerance = 1e-14;
    c.pass = c.residual <= c.tolerance;
    out.push_back(c);
  }

  const double times[] = {0.3, 1.0, 2.5};
  IdentityCheck commutator{"commutator", 0.0, tolerance, 0, false};
  IdentityCheck composition{"trilinear_composition", 0.0, tolerance, 0, false};
  IdentityCheck b_dec{"b_decomposition", 0.0, tolerance, 0, false};
  IdentityCheck c_dec{"c_decomposition", 0.0, tolerance, 0, false};
  IdentityCheck w_dec{"w_decomposition", 0.0, tolerance, 0, false};
  IdentityCheck round_trip{"lambda_round_trip", 0.0, tolerance, 0, false};

  auto w_residual = [&](const SpectralField& ut, const SpectralField& u0, double t, double eps) {
    const PicardBundle bundle = PicardBundle::build(u0, t, eps);
    const SpectralField d = extract_d(ut, bundle);
    SpectralField rhs = lambda_eps(d, bundle) + s_map(bundle.b, bundle.b);
    rhs.axpy(2.0, s_map(bundle.a, bundle.c));
    rhs.axpy(2.0 * eps, s_map(bundle.b, bundle.c));
    rhs.axpy(eps * eps, s_map(bundle.c, bundle.c));
    return relative_diff(extract_w(ut, u0, t, eps), rhs);
  };

  for (int f = 0; f < fields; ++f) {
    const std::uint64_t base = 4 * static_cast<std::uint64_t>(f);
    const SpectralField u = test_field(lat, seed, base);
    const SpectralField v = test_field(lat, seed, base + 1);
    const SpectralField w = test_field(lat, seed, base + 2);
    const SpectralField other = test_field(lat, seed, base + 3);
    const double t = times[f % 3];

    const SpectralField lhs = apply_L(s_map(u, v)) - s_map(apply_L(u), v) - s_map(u, apply_L(v));
    commutator.residual = std::max(commutator.residual, relative_diff(lhs, -0.5 * dx_product(u, v)));

    composition.residual =
        std::max(composition.residual, relative_diff(f_map(u, v, w), direct_trilinear(u, v, w)));

    const SpectralField a = apply_free_flow(u, t);
    const SpectralField b = picard_b(u, t);
    b_dec.residual = std::max(
        b_dec.residual, relative_diff(b, apply_free_flow(s_map(u, u), t) - s_map(a, a)));
    c_dec.residual = std::max(
        c_dec.residual, relative_diff(picard_c(u, t), f_integral(u, t) - 2.0 * s_map(a, b)));

    // The w identity is algebraic in u_t, so an unrelated field serves as u_t.
    w_dec.residual = std::max(w_dec.residual, w_residual(other, u, t, 0.1));

    const PicardBundle bundle = PicardBundle::build(u, t, 0.1);
    const SpectralField back = invert_lambda_eps(lambda_eps(v, bundle), bundle, 1e-15, 500, s);
    round_trip.residual = std::max(round_trip.residual, relative_diff(back, v));

    for (auto* c : {&commutator, &composition, &b_dec, &c_dec, &w_dec, &round_trip}) ++c->trials;
  }

  // One genuinely evolved sample. On an evolved state w is eps^-3 times a
  // cancellation, so its relative rounding error scales like 1 / (eps^3 |w|);
  // strong coupling keeps |w| well above that floor.
  {
    const SpectralField u0 = 4.0 * test_field(lat, seed, 1u << 20);
    const double eps = 1.0;
    const double dt = select_dt(u0, eps, 1.0);
    w_dec.residual = std::max(w_dec.residual, w_residual(evolve(u0, eps, 1.0, dt), u0, 1.0, eps));
    ++w_dec.trials;
  }

  for (auto* c : {&commutator, &composition, &b_dec, &c_dec, &w_dec, &round_trip}) {
    c->pass = c->residual <= c->tolerance;
    out.push_back(*c);
  }
  return out;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  fit.points = lx.size();
  if (lx.size() < 3) {
    fit.note = "too few usable points";
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) {
    fit.note = "degenerate abscissae";
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  const double dof = n - 2.0;
  const boost::math::students_t dist(dof);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.half_width = q * std::sqrt(rss / dof / sxx);
  fit.fitted = true;
  return fit;
}

RemainderScanResult remainder_scan(const ExperimentConfig& cfg) {
  const LatticePtr lat = Lattice::make(cfg.box);
  const SpectrumProfile prof = effective_profile(cfg, *lat);
  // Diagonal pairs only: off-diagonal remainders are mostly mean-zero and
  // would add noise to the aggregate without adding signal.
  std::vector<std::array<std::size_t, 2>> pidx;
  for (std::size_t i = lat->half_begin(); i < lat->size(); ++i) pidx.push_back({i, i});
  const auto triples = zero_sum_triples(*lat);
  std::vector<std::array<std::size_t, 3>> tidx;
  for (const auto& q : triples) {
    tidx.push_back({lat->index_or_throw(q[0]), lat->index_or_throw(q[1]), lat->index_or_throw(q[2])});
  }
  const std::size_t width = pidx.size() + tidx.size();
  const std::vector<double>& eps_list = cfg.eps_list;

  RemainderScanResult result;
  result.samples = cfg.sample_count;

  if (cfg.sample_count > 0) {
    double dt = cfg.dt;
    if (dt <= 0.0) {
      // The scan resolves differences of size eps^4 relative to O(1) data.
      const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
      const double eps_max = *std::max_element(eps_list.begin(), eps_list.end());
      const SpectralField probe = sample_u0(prof, cfg.law, lat, cfg.seed, 0);
      dt = select_dt(probe, eps_max, cfg.t, cfg.dt_target * std::pow(eps_min, 4));
    }
    result.dt = dt;

    const EnsembleRun run = run_ensemble(
        cfg.sample_count, width * eps_list.size(), cfg.threads,
        [&](std::uint64_t index, std::span<cplx> out) {
          const SpectralField u0 = sample_u0(prof, cfg.law, lat, cfg.seed, index);
          const SpectralField a = apply_free_flow(u0, cfg.t);
          const SpectralField b = picard_b(u0, cfg.t);
          const SpectralField c = picard_c(u0, cfg.t);
          for (std::size_t e = 0; e < eps_list.size(); ++e) {
            const double eps = eps_list[e];
            const SpectralField up = evolve(u0, eps, cfg.t, dt);
            const SpectralField um = evolve(u0, -eps, cfg.t, dt);
            std::span<cplx> row = out.subspan(e * width, width);
            for (std::size_t i = 0; i < pidx.size(); ++i) {
              const auto [n, m] = pidx[i];
              const cplx even = 0.5 * (up[n] * std::conj(up[m]) + um[n] * std::conj(um[m]));
              const cplx second =
                  b[n] * std::conj(b[m]) + a[n] * std::conj(c[m]) + c[n] * std::conj(a[m]);
              row[i] = even - a[n] * std::conj(a[m]) - eps * eps * second;
            }
            for (std::size_t i = 0; i < tidx.size(); ++i) {
              const auto [n, m, p] = tidx[i];
              const cplx odd = 0.5 * (up[n] * up[m] * up[p] - um[n] * um[m] * um[p]);
              const cplx first = b[n] * a[m] * a[p] + a[n] * b[m] * a[p] + a[n] * a[m] * b[p];
              row[pidx.size() + i] = odd - eps * first;
            }
          }
          return true;
        });
    result.failed = run.failed.size();

    std::vector<double> xs, pair_y, triple_y;
    std::vector<double> pair_x, triple_x;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
      RemainderRow row;
      row.eps = eps_list[e];
      double d2 = 0, s2 = 0, d3 = 0, s3 = 0;
      for (std::size_t i = 0; i < pidx.size(); ++i) {
        const auto& st = run.stats[e * width + i];
        d2 += std::norm(st.mean);
        s2 += st.se() * st.se();
      }
      for (std::size_t i = 0; i < tidx.size(); ++i) {
        const auto& st = run.stats[e * width + pidx.size() + i];
        d3 += std::norm(st.mean);
        s3 += st.se() * st.se();
      }
      row.pair_remainder = std::sqrt(d2);
      row.pair_se = std::sqrt(s2);
      row.triple_remainder = std::sqrt(d3);
      row.triple_se = std::sqrt(s3);
      row.pair_noise = !(row.pair_remainder > 3.0 * row.pair_se);
      row.triple_noise = !(row.triple_remainder > 3.0 * row.triple_se);
      if (!row.pair_noise) {
        pair_x.push_back(row.eps);
        pair_y.push_back(row.pair_remainder);
      }
      if (!row.triple_noise) {
        triple_x.push_back(row.eps);
        triple_y.push_back(row.triple_remainder);
      }
      result.rows.push_back(row);
    }
    result.pair_fit = fit_loglog(pair_x, pair_y);
    result.triple_fit = fit_loglog(triple_x, triple_y);
    if (!result.pair_fit.fitted) result.pair_fit.note = "noise-dominated";
    if (!result.triple_fit.fitted) result.triple_fit.note = "noise-dominated";
  }

  d_growth(cfg, result);
  return result;
}

void d_growth(const ExperimentConfig& cfg, RemainderScanResult& result) {
  const LatticePtr lat = Lattice::make(cfg.box);
  const SpectrumProfile prof = effective_profile(cfg, *lat);
  std::vector<double> grid = cfg.t_grid;
  std::sort(grid.begin(), grid.end());
  result.growth.clear();
  if (grid.empty()) return;
  const double eps = cfg.growth_eps;

  double dt = cfg.dt;
  if (dt <= 0.0) {
    // d carries a factor eps^-3 on the integration error.
    const SpectralField probe = sample_u0(prof, cfg.law, lat, cfg.seed, 0);
    dt = select_dt(probe, eps, grid.back(), cfg.dt_target * std::pow(eps, 3));
  }
  result.growth_dt = dt;

  const std::size_t nt = grid.size();
  // Each sample writes its own slice; the max is taken afterwards in index order.
  std::vector<double> norms(cfg.growth_samples * nt, std::numeric_limits<double>::quiet_NaN());
  const EnsembleRun run = run_ensemble(
      cfg.growth_samples, 0, cfg.threads, [&](std::uint64_t index, std::span<cplx>) {
        const SpectralField u0 = sample_u0(prof, cfg.law, lat, cfg.seed, index);
        SpectralField u = u0;
        double now = 0.0;
        for (std::size_t k = 0; k < nt; ++k) {
          if (grid[k] > now) u = evolve(u, eps, grid[k] - now, dt);
          now = grid[k];
          norms[index * nt + k] =
              grid[k] > 0.0 ? hs_norm(extract_d(u, u0, grid[k], eps), cfg.s) : 0.0;
        }
        return true;
      });
  result.failed += run.failed.size();

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < nt; ++k) {
    GrowthRow row{grid[k], 0.0};
    for (std::size_t i = 0; i < cfg.growth_samples; ++i) {
      const double v = norms[i * nt + k];
      if (std::isfinite(v)) row.max_norm = std::max(row.max_norm, v);
    }
    result.growth.push_back(row);
    xs.push_back(1.0 + row.t);
    ys.push_back(row.max_norm);
  }
  result.growth_fit = fit_loglog(xs, ys);
}

BoxLimitResult box_limit(const ExperimentConfig& cfg) {
  BoxLimitResult r;
  const GMoments g = cfg.law.moments();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool same_sign = true;
  for (const int side : cfg.sides) {
    BoxLimitRow row;
    row.side = side;
    row.level = cfg.level_scale * std::pow(static_cast<double>(side), cfg.level_exponent);
    row.value = box_limit_f2(cfg.mode, side, row.level, cfg.t, g.m2, g.m4);
    row.ratio = row.value / std::pow(row.level, 4);
    if (!r.rows.empty() && (row.ratio > 0) != (r.rows.front().ratio > 0)) same_sign = false;
    lo = std::min(lo, std::abs(row.ratio));
    hi = std::max(hi, std::abs(row.ratio));
    r.rows.push_back(row);
  }
  r.spread = (lo > 0.0 && same_sign) ? hi / lo : std::numeric_limits<double>::infinity();
  r.bounded = r.spread <= cfg.max_spread;
  r.monotone = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    if (!(std::abs(r.rows[i].value) < std::abs(r.rows[i - 1].value))) r.monotone = false;
  }
  return r;
}

EnsembleConfig ensemble_config(const ExperimentConfig& cfg) {
  EnsembleConfig e;
  const LatticePtr lat = Lattice::make(cfg.box);
  e.box = cfg.box;
  e.law = cfg.law;
  e.profile = effective_profile(cfg, *lat);
  e.eps = cfg.eps;
  e.t = cfg.t;
  e.sample_count = cfg.sample_count;
  e.seed = cfg.seed;
  e.dt = cfg.dt;
  e.dt_target = cfg.dt_target;
  e.threads = cfg.threads;
  e.antithetic_eps = cfg.antithetic;
  e.convention = cfg.convention;
  e.pairs = default_pairs(*lat);
  e.triples = default_triples(*lat);
  return e;
}

int run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  switch (cfg.command) {
    case Command::verify: return cmd_verify(cfg, out, log);
    case Command::simulate: return cmd_simulate(cfg, out, log);
    case Command::ensemble: return cmd_ensemble(cfg, out, log);
    case Command::remainder_scan: return cmd_remainder_scan(cfg, out, log);
    case Command::box_limit: return cmd_box_limit(cfg, out, log);
    case Command::theory_curves: return cmd_theory_curves(cfg, out, log);
  }
  throw std::logic_error("unhandled command");
}

}  // namespace kpnf
