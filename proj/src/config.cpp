#include "qkd/config.hpp"

#include <fstream>

#include <fmt/format.h>

#include "qkd/error.hpp"
#include "qkd/fixtures.hpp"

namespace qkd {

using nlohmann::json;

json default_config_json() {
  return json{
      {"curves", {{"fixture", "severe"}, {"csv", nullptr}, {"dt_ps", 4.5}, {"dark0", 0.0},
                  {"dark1", 0.0}}},
      {"receiver",
       {{"mode", "two-state"},
        {"visibility", 0.94},
        {"deadtime_cycles", 0},
        {"arrival_ps", 495.0},
        {"waveform",
         {{"shape", "raised-cosine"},
          {"plateau_ps", nullptr},
          {"rise_fall_ps", 200.0},
          {"period_ps", 990.0},
          {"calibration_edge_ps", 250.0},
          {"calibration_target_qber", 0.11}}}}},
      {"eve", {{"kind", "none"}, {"t1_ps", 0.0}, {"t2_ps", 0.0}, {"p1", 1.0},
               {"transmittance", 1.0}}},
      {"sweep", {{"range_ps", 1000.0}, {"step_ps", 4.5}, {"n_pulses", 100000}, {"threads", 0}}},
      {"attack", {{"qber_cap", 0.11}, {"range_ps", 1000.0}, {"step_ps", 4.5},
                  {"n_pulses", 1000000}}},
      {"keyrate",
       {{"e_bit_obs", 0.03},
        {"e_phase_obs", 0.03},
        {"f_ec", kDefaultErrorCorrection},
        {"abort_threshold", 0.11},
        {"per_bin_error", false},
        {"source", "model"},
        {"n_pulses", 100000},
        {"dt_fine_ps", 4.5},
        {"dt_coarse_ps", 49.5}}},
      {"loss",
       {{"start_db", 0.0},
        {"stop_db", 60.0},
        {"step_db", 0.5},
        {"detector_efficiency", 0.2},
        {"dark_prob_total", 2e-5},
        {"e_optical", 0.03},
        {"two_state", {{"p_succ", 0.608}, {"e_phase", 0.0470}}},
        {"four_state", {{"p_succ", 0.979}, {"e_phase", 0.0303}}}}},
      {"seed", 1},
      {"output", {{"dir", "."}, {"records", false}}},
  };
}

namespace {

void check_keys(const json& defaults, const json& given, const std::string& where) {
  if (!given.is_object()) throw ConfigError(fmt::format("'{}' must be an object", where));
  for (const auto& [key, value] : given.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", path));
    if (defaults[key].is_object()) check_keys(defaults[key], value, path);
  }
}

template <typename T>
T get(const json& doc, const char* section, const char* key) {
  const json& value = doc.at(section).at(key);
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("'{}.{}' has the wrong type", section, key));
  }
}

template <typename T>
T get(const json& obj, const std::string& path) {
  try {
    return obj.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("'{}' has the wrong type", path));
  }
}

std::uint64_t get_count(const json& doc, const char* section, const char* key) {
  const json& value = doc.at(section).at(key);
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError(fmt::format("'{}.{}' must be a non-negative integer", section, key));
  }
  return value.get<std::uint64_t>();
}

EveStrategy parse_eve(const json& eve) {
  const auto kind = get<std::string>(eve.at("kind"), "eve.kind");
  const auto t1 = get<double>(eve.at("t1_ps"), "eve.t1_ps");
  const auto t2 = get<double>(eve.at("t2_ps"), "eve.t2_ps");
  const auto p1 = get<double>(eve.at("p1"), "eve.p1");
  const auto t = get<double>(eve.at("transmittance"), "eve.transmittance");
  if (kind == "none") return EveStrategy::none(t);
  if (kind == "fixed") return EveStrategy::fixed(t1, t);
  if (kind == "two-point") return EveStrategy::two_point(t1, t2, p1, t);
  throw ConfigError(fmt::format("eve.kind must be none, fixed or two-point, not '{}'", kind));
}

ModeBounds parse_bounds(const json& obj, const std::string& path) {
  return {get<double>(obj.at("p_succ"), path + ".p_succ"),
          get<double>(obj.at("e_phase"), path + ".e_phase")};
}

}  // namespace

RunConfig parse_config(const json& overrides) {
  json doc = default_config_json();
  if (!overrides.is_null()) {
    check_keys(doc, overrides, "");
    doc.merge_patch(overrides);
  }

  RunConfig cfg;
  try {
    const json& curves = doc.at("curves");
    cfg.curves.fixture = get<std::string>(curves.at("fixture"), "curves.fixture");
    if (!curves.at("csv").is_null()) {
      cfg.curves.csv = get<std::string>(curves.at("csv"), "curves.csv");
    }
    cfg.curves.dt_ps = get<double>(doc, "curves", "dt_ps");
    cfg.curves.dark0 = get<double>(doc, "curves", "dark0");
    cfg.curves.dark1 = get<double>(doc, "curves", "dark1");

    const json& rx = doc.at("receiver");
    cfg.receiver.mode = parse_mode(get<std::string>(rx.at("mode"), "receiver.mode"));
    cfg.receiver.visibility = get<double>(rx.at("visibility"), "receiver.visibility");
    cfg.receiver.deadtime_cycles = get<int>(rx.at("deadtime_cycles"), "receiver.deadtime_cycles");
    cfg.receiver.arrival_ps = get<double>(rx.at("arrival_ps"), "receiver.arrival_ps");
    const json& wf = rx.at("waveform");
    const auto shape = get<std::string>(wf.at("shape"), "receiver.waveform.shape");
    if (shape == "raised-cosine") {
      cfg.receiver.waveform.shape = WaveformShape::RaisedCosineEdges;
    } else if (shape == "square") {
      cfg.receiver.waveform.shape = WaveformShape::IdealSquare;
    } else {
      throw ConfigError(fmt::format("waveform shape must be raised-cosine or square, not '{}'", shape));
    }
    cfg.receiver.waveform.rise_fall_ps = get<double>(wf.at("rise_fall_ps"), "rise_fall_ps");
    cfg.receiver.waveform.period_ps = get<double>(wf.at("period_ps"), "period_ps");
    cfg.calibration_edge_ps = get<double>(wf.at("calibration_edge_ps"), "calibration_edge_ps");
    cfg.calibration_target_qber =
        get<double>(wf.at("calibration_target_qber"), "calibration_target_qber");
    if (wf.at("plateau_ps").is_null()) {
      const DriveWaveform calibrated = calibrated_waveform(
          cfg.receiver.visibility, cfg.receiver.waveform.rise_fall_ps,
          cfg.receiver.waveform.period_ps, cfg.calibration_edge_ps, cfg.calibration_target_qber);
      cfg.receiver.waveform.plateau_ps = calibrated.plateau_ps;
    } else {
      cfg.receiver.waveform.plateau_ps = get<double>(wf.at("plateau_ps"), "plateau_ps");
    }
    cfg.receiver.validate();

    cfg.eve = parse_eve(doc.at("eve"));
    cfg.eve.validate();

    cfg.sweep.range_ps = get<double>(doc, "sweep", "range_ps");
    cfg.sweep.step_ps = get<double>(doc, "sweep", "step_ps");
    cfg.sweep.n_pulses = get_count(doc, "sweep", "n_pulses");
    cfg.sweep.threads = static_cast<unsigned>(get_count(doc, "sweep", "threads"));

    cfg.attack.qber_cap = get<double>(doc, "attack", "qber_cap");
    cfg.attack.range_ps = get<double>(doc, "attack", "range_ps");
    cfg.attack.step_ps = get<double>(doc, "attack", "step_ps");
    cfg.attack.n_pulses = get_count(doc, "attack", "n_pulses");

    const json& kr = doc.at("keyrate");
    cfg.keyrate.e_bit_obs = get<double>(kr.at("e_bit_obs"), "keyrate.e_bit_obs");
    cfg.keyrate.e_phase_obs = get<double>(kr.at("e_phase_obs"), "keyrate.e_phase_obs");
    cfg.keyrate.f_ec = get<double>(kr.at("f_ec"), "keyrate.f_ec");
    cfg.keyrate.abort_threshold = get<double>(kr.at("abort_threshold"), "keyrate.abort_threshold");
    cfg.keyrate.per_bin_error = get<bool>(kr.at("per_bin_error"), "keyrate.per_bin_error");
    const auto source = get<std::string>(kr.at("source"), "keyrate.source");
    if (source == "model") {
      cfg.keyrate.source = EfficiencySource::Model;
    } else if (source == "measured") {
      cfg.keyrate.source = EfficiencySource::Measured;
    } else {
      throw ConfigError(fmt::format("keyrate.source must be model or measured, not '{}'", source));
    }
    cfg.keyrate.n_pulses = get_count(doc, "keyrate", "n_pulses");
    cfg.dt_fine_ps = get<double>(kr.at("dt_fine_ps"), "keyrate.dt_fine_ps");
    cfg.dt_coarse_ps = get<double>(kr.at("dt_coarse_ps"), "keyrate.dt_coarse_ps");

    const json& loss = doc.at("loss");
    cfg.loss.start_db = get<double>(loss.at("start_db"), "loss.start_db");
    cfg.loss.stop_db = get<double>(loss.at("stop_db"), "loss.stop_db");
    cfg.loss.step_db = get<double>(loss.at("step_db"), "loss.step_db");
    cfg.loss.model.detector_efficiency =
        get<double>(loss.at("detector_efficiency"), "loss.detector_efficiency");
    cfg.loss.model.dark_prob_total = get<double>(loss.at("dark_prob_total"), "loss.dark_prob_total");
    cfg.loss.model.e_optical = get<double>(loss.at("e_optical"), "loss.e_optical");
    cfg.loss.model.f_ec = cfg.keyrate.f_ec;
    cfg.loss.two_state = parse_bounds(loss.at("two_state"), "loss.two_state");
    cfg.loss.four_state = parse_bounds(loss.at("four_state"), "loss.four_state");

    const json& seed = doc.at("seed");
    if (!seed.is_number_integer() || seed.get<long long>() < 0) {
      throw ConfigError("'seed' must be a non-negative integer");
    }
    cfg.seed = seed.get<std::uint64_t>();
    cfg.keyrate.seed = cfg.seed;
    cfg.keyrate.threads = cfg.sweep.threads;
    cfg.output_dir = get<std::string>(doc.at("output").at("dir"), "output.dir");
    cfg.write_records = get<bool>(doc.at("output").at("records"), "output.records");
  } catch (const json::out_of_range& e) {
    throw ConfigError(e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  if (!(cfg.sweep.step_ps > 0.0) || !(cfg.sweep.range_ps >= 0.0)) {
    throw ConfigError("sweep needs step_ps > 0 and range_ps >= 0");
  }
  if (!(cfg.attack.step_ps > 0.0) || !(cfg.attack.range_ps >= 0.0)) {
    throw ConfigError("attack needs step_ps > 0 and range_ps >= 0");
  }
  if (!(cfg.attack.qber_cap > 0.0 && cfg.attack.qber_cap < 0.5)) {
    throw ConfigError("attack.qber_cap must lie in (0, 0.5)");
  }
  if (!(cfg.loss.step_db > 0.0) || cfg.loss.start_db < 0.0 || cfg.loss.stop_db < cfg.loss.start_db) {
    throw ConfigError("loss grid needs 0 <= start_db <= stop_db and step_db > 0");
  }
  if (cfg.sweep.n_pulses == 0 || cfg.keyrate.n_pulses == 0 || cfg.attack.n_pulses == 0) {
    throw ConfigError("pulse counts must be at least 1");
  }
  return cfg;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  if (config.is_null()) config = json::object();
  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError(fmt::format("malformed key '{}'", key));
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw ConfigError(fmt::format("'{}' is not a section", part));
    node = &child;
    start = dot + 1;
  }
}

DetectorPair load_pair(const RunConfig& config) {
  try {
    if (config.curves.csv) {
      const DetectorPair raw = load_curves_csv(*config.curves.csv, config.curves.dark0,
                                               config.curves.dark1);
      return raw.dt_ps() == config.curves.dt_ps ? raw : resample(raw, config.curves.dt_ps);
    }
    return fixture_by_name(config.curves.fixture, config.curves.dt_ps);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace qkd
