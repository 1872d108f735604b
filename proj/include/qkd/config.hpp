#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qkd/channel.hpp"
#include "qkd/detector_model.hpp"
#include "qkd/keyrate.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

/// Configuration problem: unknown key, wrong type, invalid value, missing file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurveSource {
  std::string fixture = "severe";
  std::optional<std::filesystem::path> csv;  ///< takes precedence over the fixture
  double dt_ps = 4.5;
  double dark0 = 0.0;  ///< used for CSVs without a sidecar
  double dark1 = 0.0;
};

struct SweepSettings {
  double range_ps = 1000.0;
  double step_ps = 4.5;
  std::uint64_t n_pulses = 100'000;
  unsigned threads = 0;
};

struct AttackSettings {
  double qber_cap = 0.11;
  double range_ps = 1000.0;
  double step_ps = 4.5;
  std::uint64_t n_pulses = 1'000'000;  ///< validation session at the chosen strategy
};

struct LossSettings {
  double start_db = 0.0;
  double stop_db = 60.0;
  double step_db = 0.5;
  LossModel model;
  ModeBounds two_state{0.608, 0.0470};
  ModeBounds four_state{0.979, 0.0303};
};

struct RunConfig {
  CurveSource curves;
  ReceiverConfig receiver;
  double calibration_edge_ps = 250.0;
  double calibration_target_qber = 0.11;
  EveStrategy eve;
  SweepSettings sweep;
  AttackSettings attack;
  KeyRateSettings keyrate;
  double dt_fine_ps = 4.5;
  double dt_coarse_ps = 49.5;
  LossSettings loss;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = ".";
  bool write_records = false;
};

/// Every recognised key with its default value.
nlohmann::json default_config_json();

/// Defaults merged with `overrides`; unknown keys and ill-typed values are
/// rejected. A null waveform plateau means "calibrate".
RunConfig parse_config(const nlohmann::json& overrides);

/// Read a JSON config file.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Apply `dotted.key=value` to a config document. The value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, std::string_view assignment);

/// Curves selected by the config, on the configured grid.
DetectorPair load_pair(const RunConfig& config);

}  // namespace qkd
