#pragma once

// Flat key=value experiment configuration.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kpnf/lattice.hpp"
#include "kpnf/random_data.hpp"
#include "kpnf/theory.hpp"

namespace kpnf {

enum class Command { verify, simulate, ensemble, remainder_scan, box_limit, theory_curves };
enum class OutputFormat { csv, json };

Command parse_command(const std::string& text);
std::string to_string(Command c);

struct ExperimentConfig {
  Command command = Command::verify;
  LatticeBox box{4, 4};
  double s = kDefaultSobolevIndex;
  double eps = 0.1;
  std::vector<double> eps_list{0.2, 0.14, 0.1, 0.07};
  double t = 1.0;
  std::vector<double> t_grid{1, 2, 3, 5, 8, 12, 16, 20};
  RandomLaw law = RandomLaw::constant(1.0);
  SpectrumProfile profile = SpectrumProfile::power_decay(1.0, 3.0);
  bool normalize = true;  // rescale the profile so every sample has H^s norm <= 1
  std::size_t sample_count = 1000;
  std::uint64_t seed = 1;
  double dt = 0.0;  // 0: automatic
  double dt_target = 1e-8;
  int record_stride = 1;
  std::string out = "-";
  OutputFormat format = OutputFormat::csv;
  int threads = 1;
  TripleConvention convention = TripleConvention::derived;
  bool antithetic = false;

  int fields = 50;            // verify: random fields per identity
  double tolerance = 1e-10;   // verify: max relative residual

  double growth_eps = 0.05;   // remainder-scan: d growth
  std::size_t growth_samples = 64;

  WaveVector mode{1, 0};                 // box-limit mode
  std::vector<int> sides{4, 8, 16, 32};  // box-limit sizes
  double level_scale = 1.0;              // lambda^N = level_scale * N^level_exponent
  double level_exponent = -0.25;
  double max_spread = 10.0;

  /// Every key with its effective value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Raw key/value pairs from "key = value" lines; '#' starts a comment.
/// Throws ConfigError on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Applies key/value pairs on top of `base`, then validates. Unknown keys,
/// unparsable values and out-of-range values throw ConfigError naming the key.
ExperimentConfig apply_settings(ExperimentConfig base,
                                const std::map<std::string, std::string>& values);
void validate(const ExperimentConfig& cfg);

ExperimentConfig load_config_file(const std::string& path, const ExperimentConfig& base = {});

}  // namespace kpnf
