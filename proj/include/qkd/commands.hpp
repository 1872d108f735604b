#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkd/attack.hpp"
#include "qkd/config.hpp"
#include "qkd/keyrate.hpp"

namespace qkd {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitInfeasible = 3, kExitAborted = 4 };

/// Sweep table: `shift_ps,c0,c1,sifted,errors,qber,bias`. Undefined ratios
/// are written as nan.
std::string sweep_csv(const std::vector<SweepPoint>& table);
std::vector<SweepPoint> read_sweep_csv(const std::filesystem::path& path);

struct LossRow {
  double loss_db = 0.0;
  double rate_ideal = 0.0;
  double rate_two_state = 0.0;
  double rate_four_state = 0.0;

  friend bool operator==(const LossRow&, const LossRow&) = default;
};

/// `loss_db,rate_ideal,rate_two_state,rate_four_state`.
std::vector<LossRow> loss_table(const LossSettings& settings);
std::string loss_csv(const std::vector<LossRow>& rows);
std::vector<LossRow> read_loss_csv(const std::filesystem::path& path);

nlohmann::json to_json(const KeyRateReport& report);
KeyRateReport key_rate_report_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AttackPlan& plan);

/// Subcommands. Each writes its files under config.output_dir, prints a
/// one-object JSON summary to `out` and returns a process exit code.
int cmd_characterize(const RunConfig& config, std::ostream& out);
int cmd_attack(const RunConfig& config, std::ostream& out);
int cmd_keyrate(const RunConfig& config, std::ostream& out);
int cmd_sweep_loss(const RunConfig& config, std::ostream& out);

}  // namespace qkd
