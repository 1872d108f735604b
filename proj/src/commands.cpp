#include "qkd/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "qkd/error.hpp"
#include "qkd/statistics.hpp"

namespace qkd {

using nlohmann::json;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << text;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::string& header) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ParseError(fmt::format("{}: expected header '{}'", path.string(), header));
  }
  const std::size_t width = split(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != width) {
      throw ParseError(fmt::format("{}: row {} has {} fields", path.string(), rows.size() + 2,
                                   fields.size()));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ParseError(fmt::format("bad number '{}'", s));
  return v;
}

std::uint64_t to_count(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw ParseError(fmt::format("bad count '{}'", s));
  return v;
}

std::string ratio_text(double value) { return std::isnan(value) ? "nan" : fmt::format("{}", value); }

void emit(std::ostream& out, const json& summary) { out << summary.dump(2) << '\n'; }

std::vector<double> loss_grid(const LossSettings& s) {
  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor((s.stop_db - s.start_db) / s.step_db + 1e-9));
  for (long i = 0; i <= steps; ++i) grid.push_back(s.start_db + static_cast<double>(i) * s.step_db);
  return grid;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepPoint>& table) {
  std::string text = "shift_ps,c0,c1,sifted,errors,qber,bias\n";
  for (const SweepPoint& p : table) {
    const CountsSummary& c = p.counts;
    const double q = c.sifted ? qber(c) : std::nan("");
    const double b = c.sifted ? bias_contrast(c) : std::nan("");
    text += fmt::format("{},{},{},{},{},{},{}\n", p.shift_ps, c.c0, c.c1, c.sifted, c.errors,
                        ratio_text(q), ratio_text(b));
  }
  return text;
}

std::vector<SweepPoint> read_sweep_csv(const std::filesystem::path& path) {
  std::vector<SweepPoint> table;
  for (const auto& f : read_table(path, "shift_ps,c0,c1,sifted,errors,qber,bias")) {
    SweepPoint p;
    p.shift_ps = to_double(f[0]);
    p.counts.c0 = to_count(f[1]);
    p.counts.c1 = to_count(f[2]);
    p.counts.sifted = to_count(f[3]);
    p.counts.errors = to_count(f[4]);
    if (p.counts.c0 + p.counts.c1 != p.counts.sifted || p.counts.errors > p.counts.sifted) {
      throw ParseError(fmt::format("{}: inconsistent counts at shift {}", path.string(), f[0]));
    }
    table.push_back(p);
  }
  return table;
}

std::vector<LossRow> loss_table(const LossSettings& settings) {
  const std::vector<double> grid = loss_grid(settings);
  const ModeBounds ideal{1.0, settings.model.e_optical};
  const auto r_ideal = rate_vs_loss(ideal, grid, settings.model);
  const auto r_two = rate_vs_loss(settings.two_state, grid, settings.model);
  const auto r_four = rate_vs_loss(settings.four_state, grid, settings.model);
  std::vector<LossRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back({grid[i], r_ideal[i].rate, r_two[i].rate, r_four[i].rate});
  }
  return rows;
}

std::string loss_csv(const std::vector<LossRow>& rows) {
  std::string text = "loss_db,rate_ideal,rate_two_state,rate_four_state\n";
  for (const LossRow& r : rows) {
    text += fmt::format("{},{},{},{}\n", r.loss_db, r.rate_ideal, r.rate_two_state, r.rate_four_state);
  }
  return text;
}

std::vector<LossRow> read_loss_csv(const std::filesystem::path& path) {
  std::vector<LossRow> rows;
  for (const auto& f : read_table(path, "loss_db,rate_ideal,rate_two_state,rate_four_state")) {
    rows.push_back({to_double(f[0]), to_double(f[1]), to_double(f[2]), to_double(f[3])});
  }
  return rows;
}

json to_json(const KeyRateReport& r) {
  return json{{"mode", to_string(r.mode)},
              {"dt_ps", r.dt_ps},
              {"feasible", r.feasible},
              {"p_succ", r.p_succ},
              {"e_phase", r.e_phase},
              {"e_bit", r.e_bit},
              {"rate", r.rate},
              {"feasible_bins", r.feasible_shifts.size()},
              {"feasible_shifts_ps", r.feasible_shifts},
              {"solver", {{"method", r.method}, {"iterations", r.iterations}}}};
}

KeyRateReport key_rate_report_from_json(const json& doc) {
  KeyRateReport r;
  try {
    r.mode = parse_mode(doc.at("mode").get<std::string>());
    r.dt_ps = doc.at("dt_ps").get<double>();
    r.feasible = doc.at("feasible").get<bool>();
    r.p_succ = doc.at("p_succ").get<double>();
    r.e_phase = doc.at("e_phase").get<double>();
    r.e_bit = doc.at("e_bit").get<double>();
    r.rate = doc.at("rate").get<double>();
    r.feasible_shifts = doc.at("feasible_shifts_ps").get<std::vector<double>>();
    r.method = doc.at("solver").at("method").get<std::string>();
    r.iterations = doc.at("solver").at("iterations").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("key-rate report: {}", e.what()));
  }
  if (r.feasible_shifts.size() != doc.at("feasible_bins").get<std::size_t>()) {
    throw ParseError("key-rate report: feasible_bins does not match the shift list");
  }
  return r;
}

json to_json(const AttackPlan& plan) {
  return json{{"found", plan.found},
              {"t1_ps", plan.t1_ps},
              {"t2_ps", plan.t2_ps},
              {"p1", plan.p1},
              {"eve_info_bits", plan.eve_info_bits},
              {"predicted_qber", plan.predicted_qber}};
}

int cmd_characterize(const RunConfig& config, std::ostream& out) {
  const DetectorPair pair = load_pair(config);
  const std::vector<double> shifts = sweep_grid(config.sweep.range_ps, config.sweep.step_ps);
  const auto table = sweep_characterization(pair, config.receiver, shifts, config.sweep.n_pulses,
                                            config.seed, config.sweep.threads);
  write_file(config.output_dir / "sweep.csv", sweep_csv(table));

  // Low-QBER window and the largest bias inside it.
  std::vector<double> window;
  double max_bias = 0.0;
  double max_bias_shift = 0.0;
  for (const SweepPoint& p : table) {
    if (p.counts.sifted == 0 || abort_check(qber(p.counts), config.keyrate.abort_threshold)) continue;
    window.push_back(p.shift_ps);
    const double b = bias_contrast(p.counts);
    if (std::abs(b) > std::abs(max_bias)) {
      max_bias = b;
      max_bias_shift = p.shift_ps;
    }
  }
  bool contiguous = !window.empty();
  for (std::size_t i = 1; i < window.size(); ++i) {
    if (std::abs(window[i] - window[i - 1] - config.sweep.step_ps) > 1e-6) contiguous = false;
  }
  json summary{{"command", "characterize"},
               {"mode", to_string(config.receiver.mode)},
               {"seed", config.seed},
               {"n_pulses_per_point", config.sweep.n_pulses},
               {"rows", table.size()},
               {"plateau_ps", config.receiver.waveform.plateau_ps},
               {"window", {{"points", window.size()}, {"contiguous", contiguous}}},
               {"max_abs_bias", std::abs(max_bias)},
               {"max_abs_bias_shift_ps", max_bias_shift}};
  if (!window.empty()) {
    summary["window"]["min_shift_ps"] = window.front();
    summary["window"]["max_shift_ps"] = window.back();
  }
  write_file(config.output_dir / "characterize.json", summary.dump(2) + "\n");
  emit(out, summary);
  return kExitOk;
}

int cmd_attack(const RunConfig& config, std::ostream& out) {
  const DetectorPair pair = load_pair(config);
  const std::vector<double> grid = sweep_grid(config.attack.range_ps, config.attack.step_ps);
  const AttackPlan plan = optimize_shift_pair(pair, config.receiver, config.attack.qber_cap, grid,
                                              config.eve.channel_transmittance);
  json summary{{"command", "attack"},
               {"mode", to_string(config.receiver.mode)},
               {"qber_cap", config.attack.qber_cap},
               {"grid_points", grid.size()},
               {"plan", to_json(plan)}};
  int code = kExitOk;
  if (plan.found) {
    const EveStrategy strategy =
        EveStrategy::two_point(plan.t1_ps, plan.t2_ps, plan.p1, config.eve.channel_transmittance);
    Rng rng = derived_rng(config.seed, 0);
    std::string records;
    RecordSink sink;
    if (config.write_records) {
      sink = [&records](const PulseRecord& r) {
        records += to_jsonl(r);
        records += '\n';
      };
    }
    const CountsSummary counts =
        run_session(pair, config.receiver, strategy, config.attack.n_pulses, rng, sink);
    if (config.write_records) write_file(config.output_dir / "records.jsonl", records);
    json session{{"n_pulses", counts.n_pulses}, {"c0", counts.c0}, {"c1", counts.c1},
                 {"sifted", counts.sifted}, {"errors", counts.errors}};
    if (counts.sifted > 0) {
      const double q = qber(counts);
      session["qber"] = q;
      session["bias"] = bias_contrast(counts);
      session["aborted"] = abort_check(q, config.keyrate.abort_threshold);
      if (abort_check(q, config.keyrate.abort_threshold)) code = kExitAborted;
    } else {
      session["aborted"] = true;
      code = kExitAborted;
    }
    summary["session"] = session;
  }
  write_file(config.output_dir / "attack.json", summary.dump(2) + "\n");
  emit(out, summary);
  return code;
}

int cmd_keyrate(const RunConfig& config, std::ostream& out) {
  const DetectorPair pair = load_pair(config);
  const auto [fine, coarse] =
      resolution_comparison(pair, config.receiver, config.dt_fine_ps, config.dt_coarse_ps,
                            config.keyrate);
  json summary{{"command", "keyrate"},
               {"fine", to_json(fine)},
               {"coarse", to_json(coarse)},
               {"delta_rate", std::abs(fine.rate - coarse.rate)}};
  write_file(config.output_dir / "keyrate.json", summary.dump(2) + "\n");
  emit(out, summary);
  return fine.feasible && coarse.feasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep_loss(const RunConfig& config, std::ostream& out) {
  const auto rows = loss_table(config.loss);
  write_file(config.output_dir / "loss.csv", loss_csv(rows));
  json summary{{"command", "sweep-loss"}, {"points", rows.size()}};
  if (!rows.empty() && rows.front().rate_ideal > 0.0) {
    summary["ratio_two_state"] = rows.front().rate_two_state / rows.front().rate_ideal;
    summary["ratio_four_state"] = rows.front().rate_four_state / rows.front().rate_ideal;
  }
  for (const auto& [name, column] :
       {std::pair{"ideal", &LossRow::rate_ideal}, std::pair{"two_state", &LossRow::rate_two_state},
        std::pair{"four_state", &LossRow::rate_four_state}}) {
    json cutoff = nullptr;
    for (const LossRow& r : rows) {
      if (r.*column > 0.0) cutoff = r.loss_db;
    }
    summary["last_positive_loss_db"][name] = cutoff;
  }
  emit(out, summary);
  return kExitOk;
}

}  // namespace qkd
