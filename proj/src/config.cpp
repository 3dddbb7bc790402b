#include "kpnf/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "kpnf/errors.hpp"
#include "kpnf/io.hpp"

namespace kpnf {

namespace {

const std::map<std::string, Command>& command_names() {
  static const std::map<std::string, Command> names{
      {"verify", Command::verify},
      {"simulate", Command::simulate},
      {"ensemble", Command::ensemble},
      {"remainder-scan", Command::remainder_scan},
      {"box-limit", Command::box_limit},
      {"theory-curves", Command::theory_curves}};
  return names;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
  return out;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

double real_value(const std::string& key, const std::string& text) {
  try {
    const double x = parse_double(text);
    if (!std::isfinite(x)) throw std::invalid_argument("not finite");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "config key '" + key + "': expected a number, got '" + text + "'");
  }
}

long long int_value(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (s.empty() || pos != s.size()) {
    throw ConfigError(key, "config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(real_value(key, part));
  return out;
}

bool bool_value(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key, "config key '" + key + "': expected true or false, got '" + text + "'");
}

[[noreturn]] void reject(const std::string& key, const std::string& why) {
  throw ConfigError(key, "config key '" + key + "': " + why);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"command", [](ExperimentConfig& c, const std::string& v) {
         try {
           c.command = parse_command(trim(v));
         } catch (const std::invalid_argument& e) {
           reject("command", e.what());
         }
       }},
      {"box", [](ExperimentConfig& c, const std::string& v) {
         const auto parts = split(v, ',');
         if (parts.size() != 2) reject("box", "expected N1,N2");
         c.box = {static_cast<int>(int_value("box", parts[0])),
                  static_cast<int>(int_value("box", parts[1]))};
       }},
      {"s", [](ExperimentConfig& c, const std::string& v) { c.s = real_value("s", v); }},
      {"eps", [](ExperimentConfig& c, const std::string& v) { c.eps = real_value("eps", v); }},
      {"eps_list",
       [](ExperimentConfig& c, const std::string& v) { c.eps_list = real_list("eps_list", v); }},
      {"t", [](ExperimentConfig& c, const std::string& v) { c.t = real_value("t", v); }},
      {"t_grid",
       [](ExperimentConfig& c, const std::string& v) { c.t_grid = real_list("t_grid", v); }},
      {"law", [](ExperimentConfig& c, const std::string& v) {
         try {
           c.law = RandomLaw::parse(trim(v));
         } catch (const std::invalid_argument& e) {
           reject("law", e.what());
         }
       }},
      {"profile", [](ExperimentConfig& c, const std::string& v) {
         try {
           c.profile = SpectrumProfile::parse(trim(v));
         } catch (const std::invalid_argument& e) {
           reject("profile", e.what());
         }
       }},
      {"normalize",
       [](ExperimentConfig& c, const std::string& v) { c.normalize = bool_value("normalize", v); }},
      {"samples", [](ExperimentConfig& c, const std::string& v) {
         const long long n = int_value("samples", v);
         if (n < 0) reject("samples", "must be >= 0");
         c.sample_count = static_cast<std::size_t>(n);
       }},
      {"seed", [](ExperimentConfig& c, const std::string& v) {
         const std::string s = trim(v);
         std::size_t pos = 0;
         try {
           c.seed = std::stoull(s, &pos);
         } catch (const std::exception&) {
           pos = 0;
         }
         if (s.empty() || pos != s.size() || s[0] == '-') reject("seed", "expected an unsigned integer");
       }},
      {"dt", [](ExperimentConfig& c, const std::string& v) { c.dt = real_value("dt", v); }},
      {"dt_target",
       [](ExperimentConfig& c, const std::string& v) { c.dt_target = real_value("dt_target", v); }},
      {"record_stride", [](ExperimentConfig& c, const std::string& v) {
         c.record_stride = static_cast<int>(int_value("record_stride", v));
       }},
      {"out", [](ExperimentConfig& c, const std::string& v) { c.out = trim(v); }},
      {"format", [](ExperimentConfig& c, const std::string& v) {
         const std::string f = trim(v);
         if (f == "csv") {
           c.format = OutputFormat::csv;
         } else if (f == "json") {
           c.format = OutputFormat::json;
         } else {
           reject("format", "expected csv or json, got '" + f + "'");
         }
       }},
      {"threads", [](ExperimentConfig& c, const std::string& v) {
         c.threads = static_cast<int>(int_value("threads", v));
       }},
      {"convention", [](ExperimentConfig& c, const std::string& v) {
         try {
           c.convention = parse_triple_convention(trim(v));
         } catch (const std::invalid_argument& e) {
           reject("convention", e.what());
         }
       }},
      {"antithetic",
       [](ExperimentConfig& c, const std::string& v) { c.antithetic = bool_value("antithetic", v); }},
      {"fields", [](ExperimentConfig& c, const std::string& v) {
         c.fields = static_cast<int>(int_value("fields", v));
       }},
      {"tolerance",
       [](ExperimentConfig& c, const std::string& v) { c.tolerance = real_value("tolerance", v); }},
      {"growth_eps", [](ExperimentConfig& c, const std::string& v) {
         c.growth_eps = real_value("growth_eps", v);
       }},
      {"growth_samples", [](ExperimentConfig& c, const std::string& v) {
         const long long n = int_value("growth_samples", v);
         if (n < 1) reject("growth_samples", "must be >= 1");
         c.growth_samples = static_cast<std::size_t>(n);
       }},
      {"mode", [](ExperimentConfig& c, const std::string& v) {
         const auto parts = split(v, ',');
         if (parts.size() != 2) reject("mode", "expected n1,n2");
         c.mode = {static_cast<int>(int_value("mode", parts[0])),
                   static_cast<int>(int_value("mode", parts[1]))};
       }},
      {"sides", [](ExperimentConfig& c, const std::string& v) {
         c.sides.clear();
         for (const auto& p : split(v, ',')) c.sides.push_back(static_cast<int>(int_value("sides", p)));
       }},
      {"level_scale", [](ExperimentConfig& c, const std::string& v) {
         c.level_scale = real_value("level_scale", v);
       }},
      {"level_exponent", [](ExperimentConfig& c, const std::string& v) {
         c.level_exponent = real_value("level_exponent", v);
       }},
      {"max_spread", [](ExperimentConfig& c, const std::string& v) {
         c.max_spread = real_value("max_spread", v);
       }},
  };
  return table;
}

}  // namespace

Command parse_command(const std::string& text) {
  const auto it = command_names().find(text);
  if (it == command_names().end()) throw std::invalid_argument("unknown command '" + text + "'");
  return it->second;
}

std::string to_string(Command c) {
  for (const auto& [name, value] : command_names()) {
    if (value == c) return name;
  }
  return "?";
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  return {
      {"command", to_string(command)},
      {"box", std::to_string(box.N1) + "," + std::to_string(box.N2)},
      {"s", format_double(s)},
      {"eps", format_double(eps)},
      {"eps_list", join_doubles(eps_list)},
      {"t", format_double(t)},
      {"t_grid", join_doubles(t_grid)},
      {"law", law.spec()},
      {"profile", profile.spec()},
      {"normalize", normalize ? "true" : "false"},
      {"samples", std::to_string(sample_count)},
      {"seed", std::to_string(seed)},
      {"dt", format_double(dt)},
      {"dt_target", format_double(dt_target)},
      {"record_stride", std::to_string(record_stride)},
      {"out", out},
      {"format", format == OutputFormat::csv ? "csv" : "json"},
      {"threads", std::to_string(threads)},
      {"convention", to_string(convention)},
      {"antithetic", antithetic ? "true" : "false"},
      {"fields", std::to_string(fields)},
      {"tolerance", format_double(tolerance)},
      {"growth_eps", format_double(growth_eps)},
      {"growth_samples", std::to_string(growth_samples)},
      {"mode", std::to_string(mode.n1) + "," + std::to_string(mode.n2)},
      {"sides", join_ints(sides)},
      {"level_scale", format_double(level_scale)},
      {"level_exponent", format_double(level_exponent)},
      {"max_spread", format_double(max_spread)},
  };
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(body, "line " + std::to_string(lineno) + ": expected key = value, got '" +
                                  body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    }
    if (!out.emplace(key, trim(body.substr(eq + 1))).second) {
      throw ConfigError(key, "config key '" + key + "' appears twice");
    }
  }
  return out;
}

ExperimentConfig apply_settings(ExperimentConfig base,
                                const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown config key '" + key + "'");
    it->second(base, value);
  }
  validate(base);
  return base;
}

void validate(const ExperimentConfig& c) {
  if (c.box.N1 < 1 || c.box.N2 < 0) reject("box", "need N1 >= 1 and N2 >= 0");
  if (!(c.s > 0.0)) reject("s", "must be > 0");
  if (!(c.eps >= 0.0 && c.eps <= 1.0)) reject("eps", "must lie in [0, 1]");
  for (const double e : c.eps_list) {
    if (!(e > 0.0 && e <= 1.0)) reject("eps_list", "values must lie in (0, 1]");
  }
  for (const double t : c.t_grid) {
    if (!(t >= 0.0)) reject("t_grid", "values must be >= 0");
  }
  if (c.profile.kind == SpectrumProfile::Kind::power_decay && !(c.profile.exponent > c.s + 1.0)) {
    reject("profile", "power exponent must exceed s + 1");
  }
  if (c.dt < 0.0) reject("dt", "must be >= 0 (0 selects the step automatically)");
  if (!(c.dt_target > 0.0)) reject("dt_target", "must be > 0");
  if (c.record_stride < 1) reject("record_stride", "must be >= 1");
  if (c.threads < 1) reject("threads", "must be >= 1");
  if (c.fields < 1) reject("fields", "must be >= 1");
  if (!(c.tolerance > 0.0)) reject("tolerance", "must be > 0");
  if (!(c.growth_eps > 0.0 && c.growth_eps <= 1.0)) reject("growth_eps", "must lie in (0, 1]");
  if (c.mode.n1 == 0) reject("mode", "first component must be nonzero");
  for (const int n : c.sides) {
    if (n < 1) reject("sides", "values must be >= 1");
  }
  if (!(c.level_scale > 0.0)) reject("level_scale", "must be > 0");
  if (!(c.max_spread >= 1.0)) reject("max_spread", "must be >= 1");

  // Command-specific requirements.
  if (c.command == Command::remainder_scan) {
    if (c.eps_list.size() < 3) reject("eps_list", "remainder-scan needs at least 3 values");
    if (c.t_grid.size() < 3) reject("t_grid", "remainder-scan needs at least 3 times");
  }
  if (c.command == Command::box_limit) {
    const GMoments g = c.law.moments();
    if (std::abs(g.m2 - 1.0) > 1e-12 || std::abs(g.m4 - 2.0) > 1e-12) {
      reject("law", "box-limit needs m2 = 1 and m4 = 2, got m2 = " + format_double(g.m2) +
                        ", m4 = " + format_double(g.m4));
    }
    if (c.sides.size() < 2) reject("sides", "box-limit needs at least 2 sizes");
  }
  if (c.command == Command::theory_curves && c.t_grid.empty()) {
    reject("t_grid", "theory-curves needs a time grid");
  }
}

ExperimentConfig load_config_file(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return apply_settings(base, parse_key_values(ss.str()));
}

}  // namespace kpnf
