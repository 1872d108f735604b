// Command-line front end. Every flag is an override of a config key.

#include <iostream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "qkd/commands.hpp"
#include "qkd/config.hpp"
#include "qkd/error.hpp"
#include "qkd/validators.hpp"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::string seed;
  std::string out_dir;
  std::string mode;
  std::string fixture;
  std::string curves;
  std::string n_pulses;
  std::string n_pulses_key;
  bool records = false;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Options& opt, const std::string& n_pulses_key) {
  cmd->add_option("-c,--config", opt.config_path, "JSON config file");
  cmd->add_option("-s,--set", opt.sets, "Override a config key: section.key=value");
  cmd->add_option("--seed", opt.seed, "seed");
  cmd->add_option("-o,--out", opt.out_dir, "output.dir");
  cmd->add_option("--mode", opt.mode, "receiver.mode (two-state | four-state)");
  cmd->add_option("--fixture", opt.fixture, "curves.fixture (severe | matched | flat | band-limited)");
  cmd->add_option("--curves", opt.curves, "curves.csv (time_ps,eta0,eta1)");
  if (!n_pulses_key.empty()) cmd->add_option("-n,--n-pulses", opt.n_pulses, n_pulses_key);
  cmd->add_flag("--records", opt.records, "output.records (attack writes records.jsonl)");
  cmd->add_flag("--print-config", opt.print_config, "Print the effective config and exit");
}

nlohmann::json build_overrides(const Options& opt) {
  nlohmann::json doc = opt.config_path.empty() ? nlohmann::json::object()
                                               : qkd::load_config_file(opt.config_path);
  auto set_string = [&doc](const char* key, const std::string& value) {
    if (!value.empty()) qkd::apply_override(doc, std::string(key) + "=" + nlohmann::json(value).dump());
  };
  auto set_raw = [&doc](const char* key, const std::string& value) {
    if (!value.empty()) qkd::apply_override(doc, std::string(key) + "=" + value);
  };
  set_raw("seed", opt.seed);
  set_string("output.dir", opt.out_dir);
  set_string("receiver.mode", opt.mode);
  set_string("curves.fixture", opt.fixture);
  set_string("curves.csv", opt.curves);
  if (!opt.n_pulses_key.empty()) set_raw(opt.n_pulses_key.c_str(), opt.n_pulses);
  if (opt.records) doc["output"]["records"] = true;
  for (const auto& s : opt.sets) qkd::apply_override(doc, s);
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-shift attack and four-state countermeasure simulator"};
  app.require_subcommand(1);
  Options opt;

  using Command = int (*)(const qkd::RunConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, std::string, Command>> table{
      {"characterize", "Monte Carlo sweep over fixed shifts (sweep.csv)", "sweep.n_pulses",
       qkd::cmd_characterize},
      {"attack", "Optimal two-point shift attack (attack.json)", "attack.n_pulses", qkd::cmd_attack},
      {"keyrate", "Key-rate bounds at two time resolutions (keyrate.json)", "keyrate.n_pulses",
       qkd::cmd_keyrate},
      {"sweep-loss", "Key rate versus channel loss (loss.csv)", "", qkd::cmd_sweep_loss},
      {"oracle", "Check library routines against brute-force oracles", "", qkd::cmd_oracle},
  };
  Command chosen = nullptr;
  for (const auto& [name, help, n_key, fn] : table) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, opt, n_key);
    cmd->callback([&chosen, &opt, fn = fn, key = n_key] {
      chosen = fn;
      opt.n_pulses_key = key;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qkd::kExitConfig;
  }

  try {
    const nlohmann::json overrides = build_overrides(opt);
    const qkd::RunConfig config = qkd::parse_config(overrides);
    if (opt.print_config) {
      nlohmann::json effective = qkd::default_config_json();
      effective.merge_patch(overrides);
      effective["receiver"]["waveform"]["plateau_ps"] = config.receiver.waveform.plateau_ps;
      std::cout << effective.dump(2) << '\n';
      return qkd::kExitOk;
    }
    return chosen(config, std::cout);
  } catch (const qkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return qkd::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qkd::kExitFailure;
  }
}
