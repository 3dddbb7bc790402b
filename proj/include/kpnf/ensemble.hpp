#pragma once

// Monte Carlo estimation of second and third moments of the random truncated
// flow, with deterministic parallel reduction.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kpnf/lattice.hpp"
#include "kpnf/random_data.hpp"
#include "kpnf/theory.hpp"

namespace kpnf {

/// Running mean and centered second moment of a complex observable, kept per
/// component so that standard errors are componentwise.
struct RunningMoments {
  double count = 0.0;
  cplx mean{};
  double m2_re = 0.0;
  double m2_im = 0.0;

  void add(cplx x);
  void merge(const RunningMoments& other);
  /// Sample standard deviation / sqrt(count), per component.
  double se_re() const;
  double se_im() const;
  double se() const;  // sqrt(se_re^2 + se_im^2)
};

struct EnsembleRun {
  std::vector<RunningMoments> stats;
  std::size_t completed = 0;
  std::vector<std::uint64_t> failed;  // sample indices
  std::string first_failure;
};

/// Evaluates `width` complex observables for sample index i; returns false (or
/// throws kpnf::NonFinite) when the sample must be skipped.
using SampleObservables = std::function<bool(std::uint64_t index, std::span<cplx> out)>;

/// Runs samples 0..count-1 on `threads` workers. Samples are grouped in
/// blocks of 64 and block results are merged pairwise in index order, so the
/// result does not depend on the thread count or scheduling.
EnsembleRun run_ensemble(std::size_t count, std::size_t width, int threads,
                         const SampleObservables& fn);

using ModePair = std::array<WaveVector, 2>;
using ModeTriple = std::array<WaveVector, 3>;

/// Pairs (n, m) with n1 > 0, up to the redundancy E(u_-n conj u_-m) = conj E(u_n conj u_m).
std::vector<ModePair> default_pairs(const Lattice& lattice);
/// Unordered triples {n, m, p} of box modes.
std::vector<ModeTriple> default_triples(const Lattice& lattice);

struct EnsembleConfig {
  LatticeBox box{3, 3};
  SpectrumProfile profile;  // used as given; normalize beforehand if wanted
  RandomLaw law;
  double eps = 0.1;
  double t = 1.0;
  std::size_t sample_count = 1000;
  std::uint64_t seed = 1;
  double dt = 0.0;          // <= 0: select_dt on sample 0
  double dt_target = 1e-8;  // step-halving target for the automatic dt
  int threads = 1;
  /// Also run each sample at -eps and report the part of the pair (triple)
  /// observables that is even (odd) in eps. Both halves have the same
  /// expectation as the plain estimator since u(-eps, u0) = -u(eps, -u0).
  bool antithetic_eps = false;
  TripleConvention convention = TripleConvention::derived;
  std::vector<ModePair> pairs;
  std::vector<ModeTriple> triples;
};

struct MomentEntry {
  enum class Kind { pair, triple };
  Kind kind = Kind::pair;
  std::array<WaveVector, 3> modes{};  // third entry unused for pairs
  cplx estimate{};
  double se_re = 0.0;
  double se_im = 0.0;
  double se = 0.0;
  cplx prediction{};
  double z = 0.0;  // |estimate - prediction| / se

  bool zero_sum() const;
  bool diagonal() const { return kind == Kind::pair && modes[0] == modes[1]; }
};

struct MomentReport {
  std::vector<MomentEntry> pairs;
  std::vector<MomentEntry> triples;
  std::size_t sample_count = 0;  // successful samples
  std::size_t requested = 0;
  std::vector<std::uint64_t> failed_samples;
  double eps = 0.0;
  double t = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

/// Pair prediction delta_nm m2 |lambda_n|^2 + eps^2 F_{n,m}(t); triple
/// prediction eps F_{n,m,p}(t).
MomentReport estimate_moments(const EnsembleConfig& cfg);

/// CSV with columns kind,n1,n2,m1,m2,p1,p2,re_est,im_est,se,re_pred,im_pred,z,
/// preceded by each comment line prefixed with "# ". Pair rows leave p1,p2 empty.
void write_report_csv(std::ostream& os, const MomentReport& report,
                      const std::vector<std::string>& comments = {});
std::vector<MomentEntry> read_report_csv(std::istream& is);

}  // namespace kpnf
