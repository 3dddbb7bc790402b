#pragma once

// The experiment commands behind the CLI. Each computation is exposed as a
// plain function returning a result struct; run_command wires them to output.

#include <iosfwd>
#include <string>
#include <vector>

#include "kpnf/config.hpp"
#include "kpnf/ensemble.hpp"

namespace kpnf {

/// Profile actually used for sampling: normalized on the lattice when cfg.normalize.
SpectrumProfile effective_profile(const ExperimentConfig& cfg, const Lattice& lattice);

struct IdentityCheck {
  std::string name;
  double residual = 0.0;  // max relative residual over all trials
  double tolerance = 0.0;
  int trials = 0;
  bool pass = false;
};

/// Resonance bound scan, commutator identity, F = -S(c, dx(ab)) against a
/// direct triple sum, b and c decompositions, the w decomposition (random
/// u_t plus one evolved sample) and the Lambda_eps round trip.
std::vector<IdentityCheck> verify_identities(LatticeBox box, int fields, std::uint64_t seed,
                                             double tolerance, double s);

struct SlopeFit {
  bool fitted = false;
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% confidence half width of the slope
  std::size_t points = 0;
  std::string note;
};

/// Least squares fit of log y against log x. Needs 3 points with positive y.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct RemainderRow {
  double eps = 0.0;
  double pair_remainder = 0.0;  // sqrt(sum_n |D2_nn|^2), n1 > 0
  double pair_se = 0.0;         // sqrt(sum_n se_n^2)
  double triple_remainder = 0.0;
  double triple_se = 0.0;
  bool pair_noise = false;  // remainder < 3 se
  bool triple_noise = false;
};

struct GrowthRow {
  double t = 0.0;
  double max_norm = 0.0;  // max over samples of ||d(t)||_{H^s}
};

struct RemainderScanResult {
  std::vector<RemainderRow> rows;
  SlopeFit pair_fit;
  SlopeFit triple_fit;
  double dt = 0.0;
  std::vector<GrowthRow> growth;
  SlopeFit growth_fit;  // log max_norm against log(1 + t)
  double growth_dt = 0.0;
  std::size_t samples = 0;
  std::size_t failed = 0;
};

/// Remainders of the moment expansions across eps with common random numbers.
/// Each sample is run at +eps and -eps; the eps-even (pairs) or eps-odd
/// (triples) part minus the sample's own Picard terms through the predicted
/// order leaves a per-sample remainder whose mean is D2 (D3).
RemainderScanResult remainder_scan(const ExperimentConfig& cfg);

/// d(t) growth part of the scan only.
void d_growth(const ExperimentConfig& cfg, RemainderScanResult& result);

struct BoxLimitRow {
  int side = 0;
  double level = 0.0;
  double value = 0.0;
  double ratio = 0.0;  // value / level^4
};

struct BoxLimitResult {
  std::vector<BoxLimitRow> rows;
  double spread = 0.0;  // max |ratio| / min |ratio|
  bool bounded = false;
  bool monotone = false;  // |value| strictly decreasing in the side
};

BoxLimitResult box_limit(const ExperimentConfig& cfg);

/// Builds the ensemble configuration (all pairs with n1 > 0, all unordered triples).
EnsembleConfig ensemble_config(const ExperimentConfig& cfg);

/// Runs cfg.command, writing results to `out` and progress or summaries to
/// `log`. Returns 0, or 1 when a scientific check of the command fails.
int run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log);

}  // namespace kpnf
