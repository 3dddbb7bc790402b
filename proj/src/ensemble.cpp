#include "kpnf/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "kpnf/errors.hpp"
#include "kpnf/galerkin.hpp"
#include "kpnf/io.hpp"

namespace kpnf {

void RunningMoments::add(cplx x) {
  count += 1.0;
  const cplx d = x - mean;
  mean += d / count;
  const cplx d2 = x - mean;
  m2_re += d.real() * d2.real();
  m2_im += d.imag() * d2.imag();
}

void RunningMoments::merge(const RunningMoments& other) {
  if (other.count == 0.0) return;
  if (count == 0.0) {
    *this = other;
    return;
  }
  const double total = count + other.count;
  const cplx d = other.mean - mean;
  const double w = count * other.count / total;
  m2_re += other.m2_re + d.real() * d.real() * w;
  m2_im += other.m2_im + d.imag() * d.imag() * w;
  mean += d * (other.count / total);
  count = total;
}

double RunningMoments::se_re() const {
  return count > 1.0 ? std::sqrt(m2_re / (count - 1.0) / count) : 0.0;
}

double RunningMoments::se_im() const {
  return count > 1.0 ? std::sqrt(m2_im / (count - 1.0) / count) : 0.0;
}

double RunningMoments::se() const { return std::hypot(se_re(), se_im()); }

namespace {

constexpr std::size_t kBlock = 64;

struct BlockResult {
  std::vector<RunningMoments> stats;
  std::size_t completed = 0;
  std::vector<std::uint64_t> failed;
  std::string first_failure;
};

void merge_into(BlockResult& into, const BlockResult& from) {
  for (std::size_t i = 0; i < into.stats.size(); ++i) into.stats[i].merge(from.stats[i]);
  into.completed += from.completed;
  into.failed.insert(into.failed.end(), from.failed.begin(), from.failed.end());
  if (into.first_failure.empty()) into.first_failure = from.first_failure;
}

}  // namespace

EnsembleRun run_ensemble(std::size_t count, std::size_t width, int threads,
                         const SampleObservables& fn) {
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  std::vector<BlockResult> results(blocks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    std::vector<cplx> values(width);
    while (true) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      BlockResult& r = results[b];
      r.stats.assign(width, {});
      const std::size_t end = std::min(count, (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) {
        bool ok = false;
        try {
          ok = fn(i, values);
        } catch (const NonFinite& e) {
          if (r.first_failure.empty()) r.first_failure = e.what();
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(blocks);
          return;
        }
        if (!ok) {
          r.failed.push_back(i);
          continue;
        }
        for (std::size_t k = 0; k < width; ++k) r.stats[k].add(values[k]);
        ++r.completed;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(blocks)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  // Fixed-shape pairwise reduction over blocks in index order.
  while (results.size() > 1) {
    std::vector<BlockResult> next_level;
    for (std::size_t i = 0; i < results.size(); i += 2) {
      if (i + 1 < results.size()) merge_into(results[i], results[i + 1]);
      next_level.push_back(std::move(results[i]));
    }
    results = std::move(next_level);
  }

  EnsembleRun run;
  if (results.empty()) {
    run.stats.assign(width, {});
    return run;
  }
  run.stats = std::move(results[0].stats);
  run.completed = results[0].completed;
  run.failed = std::move(results[0].failed);
  run.first_failure = std::move(results[0].first_failure);
  return run;
}

std::vector<ModePair> default_pairs(const Lattice& lattice) {
  std::vector<ModePair> out;
  for (std::size_t i = lattice.half_begin(); i < lattice.size(); ++i) {
    for (std::size_t j = 0; j < lattice.size(); ++j) {
      if (j >= lattice.half_begin() && j < i) continue;
      out.push_back({lattice.mode(i), lattice.mode(j)});
    }
  }
  return out;
}

std::vector<ModeTriple> default_triples(const Lattice& lattice) {
  std::vector<ModeTriple> out;
  const std::size_t n = lattice.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      for (std::size_t k = j; k < n; ++k) {
        out.push_back({lattice.mode(i), lattice.mode(j), lattice.mode(k)});
      }
    }
  }
  return out;
}

bool MomentEntry::zero_sum() const {
  return kind == Kind::triple && modes[0] + modes[1] + modes[2] == WaveVector{0, 0};
}

MomentReport estimate_moments(const EnsembleConfig& cfg) {
  const LatticePtr lattice = Lattice::make(cfg.box);
  MomentReport report;
  report.eps = cfg.eps;
  report.t = cfg.t;
  report.seed = cfg.seed;
  report.requested = cfg.sample_count;

  std::vector<std::array<std::size_t, 2>> pair_idx;
  for (const auto& pr : cfg.pairs) {
    pair_idx.push_back({lattice->index_or_throw(pr[0]), lattice->index_or_throw(pr[1])});
  }
  std::vector<std::array<std::size_t, 3>> triple_idx;
  for (const auto& tr : cfg.triples) {
    triple_idx.push_back({lattice->index_or_throw(tr[0]), lattice->index_or_throw(tr[1]),
                          lattice->index_or_throw(tr[2])});
  }
  if (cfg.sample_count == 0) return report;

  double dt = cfg.dt;
  if (dt <= 0.0) {
    const SpectralField probe = sample_u0(cfg.profile, cfg.law, lattice, cfg.seed, 0);
    dt = select_dt(probe, cfg.eps, cfg.t, cfg.dt_target);
  }
  report.dt = dt;

  const std::size_t np = pair_idx.size();
  const std::size_t width = np + triple_idx.size();
  auto observe = [&](const SpectralField& u, double pair_w, double triple_w, std::span<cplx> out,
                     bool accumulate) {
    for (std::size_t i = 0; i < np; ++i) {
      const cplx v = pair_w * u[pair_idx[i][0]] * std::conj(u[pair_idx[i][1]]);
      out[i] = accumulate ? out[i] + v : v;
    }
    for (std::size_t i = 0; i < triple_idx.size(); ++i) {
      const auto& q = triple_idx[i];
      const cplx v = triple_w * u[q[0]] * u[q[1]] * u[q[2]];
      out[np + i] = accumulate ? out[np + i] + v : v;
    }
  };

  const EnsembleRun run = run_ensemble(
      cfg.sample_count, width, cfg.threads, [&](std::uint64_t index, std::span<cplx> out) {
        const SpectralField u0 = sample_u0(cfg.profile, cfg.law, lattice, cfg.seed, index);
        const SpectralField u = evolve(u0, cfg.eps, cfg.t, dt);
        if (!cfg.antithetic_eps) {
          observe(u, 1.0, 1.0, out, false);
          return true;
        }
        const SpectralField mirrored = evolve(u0, -cfg.eps, cfg.t, dt);
        observe(u, 0.5, 0.5, out, false);
        observe(mirrored, 0.5, -0.5, out, true);
        return true;
      });

  report.sample_count = run.completed;
  report.failed_samples = run.failed;

  const TheoryContext ctx = TheoryContext::make(lattice, cfg.profile, cfg.law.moments());
  auto finish = [](MomentEntry& e, const RunningMoments& st) {
    e.estimate = st.mean;
    e.se_re = st.se_re();
    e.se_im = st.se_im();
    e.se = st.se();
    const double diff = std::abs(e.estimate - e.prediction);
    // Rounding floor: with constant-modulus data some observables are exact
    // up to the last bits and their sample spread is pure rounding.
    const double floor =
        64.0 * std::numeric_limits<double>::epsilon() * (std::abs(e.estimate) + std::abs(e.prediction));
    const double se = std::max(e.se, floor);
    e.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  };
  for (std::size_t i = 0; i < np; ++i) {
    MomentEntry e;
    e.kind = MomentEntry::Kind::pair;
    e.modes = {cfg.pairs[i][0], cfg.pairs[i][1], WaveVector{}};
    if (e.modes[0] == e.modes[1]) {
      e.prediction = ctx.m2 * ctx.power[pair_idx[i][0]] +
                     cfg.eps * cfg.eps * f2_diag(ctx, e.modes[0], cfg.t);
    }
    finish(e, run.stats[i]);
    report.pairs.push_back(e);
  }
  for (std::size_t i = 0; i < triple_idx.size(); ++i) {
    MomentEntry e;
    e.kind = MomentEntry::Kind::triple;
    e.modes = cfg.triples[i];
    e.prediction = cfg.eps * f3(ctx, e.modes[0], e.modes[1], e.modes[2], cfg.t, cfg.convention);
    finish(e, run.stats[np + i]);
    report.triples.push_back(e);
  }
  return report;
}

void write_report_csv(std::ostream& os, const MomentReport& report,
                      const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "kind,n1,n2,m1,m2,p1,p2,re_est,im_est,se,re_pred,im_pred,z\n";
  auto row = [&os](const MomentEntry& e) {
    const bool triple = e.kind == MomentEntry::Kind::triple;
    os << (triple ? "triple" : "pair") << ',' << e.modes[0].n1 << ',' << e.modes[0].n2 << ','
       << e.modes[1].n1 << ',' << e.modes[1].n2 << ',';
    if (triple) os << e.modes[2].n1 << ',' << e.modes[2].n2;
    else os << ',';
    os << ',' << format_double(e.estimate.real()) << ',' << format_double(e.estimate.imag())
       << ',' << format_double(e.se) << ',' << format_double(e.prediction.real()) << ','
       << format_double(e.prediction.imag()) << ',' << format_double(e.z) << '\n';
  };
  for (const auto& e : report.pairs) row(e);
  for (const auto& e : report.triples) row(e);
}

std::vector<MomentEntry> read_report_csv(std::istream& is) {
  std::vector<MomentEntry> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 13) throw std::runtime_error("moment CSV: expected 13 fields: " + line);
    MomentEntry e;
    e.kind = f[0] == "triple" ? MomentEntry::Kind::triple : MomentEntry::Kind::pair;
    e.modes[0] = {std::stoi(f[1]), std::stoi(f[2])};
    e.modes[1] = {std::stoi(f[3]), std::stoi(f[4])};
    if (e.kind == MomentEntry::Kind::triple) e.modes[2] = {std::stoi(f[5]), std::stoi(f[6])};
    e.estimate = {parse_double(f[7]), parse_double(f[8])};
    e.se = parse_double(f[9]);
    e.prediction = {parse_double(f[10]), parse_double(f[11])};
    e.z = parse_double(f[12]);
    out.push_back(e);
  }
  return out;
}

}  // namespace kpnf
