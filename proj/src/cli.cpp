#include "kpnf/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "kpnf/config.hpp"
#include "kpnf/errors.hpp"
#include "kpnf/experiments.hpp"
#include "kpnf/io.hpp"

namespace kpnf {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Normal-form and moment experiments for the truncated KP-II flow on the torus"};
  std::string config_path;
  std::string command;
  std::string seed;
  std::string out_path;
  std::string format;
  std::string threads;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--command", command,
                 "verify | simulate | ensemble | remainder-scan | box-limit | theory-curves");
  app.add_option("--seed", seed, "base seed (unsigned 64-bit)");
  app.add_option("--out", out_path, "output path, '-' for stdout");
  app.add_option("--format", format, "csv or json");
  app.add_option("--threads", threads, "worker threads for sample loops");
  app.add_option("--set", sets, "override a config key, key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  ExperimentConfig cfg;
  try {
    // File first, then --set, then the dedicated flags.
    std::map<std::string, std::string> values;
    if (!config_path.empty()) values = parse_key_values(read_file(config_path));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value, got '" + s + "'");
      values[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    if (!command.empty()) values["command"] = command;
    if (!seed.empty()) values["seed"] = seed;
    if (!out_path.empty()) values["out"] = out_path;
    if (!format.empty()) values["format"] = format;
    if (!threads.empty()) values["threads"] = threads;
    cfg = apply_settings(ExperimentConfig{}, values);
  } catch (const ConfigError& e) {
    err << "configuration error [" << e.key() << "]: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (cfg.out == "-") return run_command(cfg, out, err);
    std::ofstream file(cfg.out);
    if (!file) {
      err << "configuration error [out]: cannot open '" << cfg.out << "' for writing\n";
      return kExitConfig;
    }
    const int code = run_command(cfg, file, err);
    file.close();
    if (!file) {
      err << "runtime error: failed writing '" << cfg.out << "'\n";
      return kExitRuntime;
    }
    return code;
  } catch (const ConfigError& e) {
    err << "configuration error [" << e.key() << "]: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace kpnf
