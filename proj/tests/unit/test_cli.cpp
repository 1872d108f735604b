#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qkd/commands.hpp"
#include "qkd/config.hpp"
#include "qkd/error.hpp"
#include "qkd/fixtures.hpp"

using namespace qkd;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qkd_cli" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config(const std::filesystem::path& dir) {
  json overrides{{"sweep", {{"n_pulses", 3000}}},
                 {"attack", {{"n_pulses", 20000}}},
                 {"output", {{"dir", dir.string()}}}};
  return parse_config(overrides);
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(QKDSIM_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Config, DefaultsParse) {
  const RunConfig c = parse_config(json{});
  EXPECT_EQ(c.curves.fixture, "severe");
  EXPECT_EQ(c.receiver.mode, DemodulationMode::TwoState);
  EXPECT_EQ(c.receiver.visibility, 0.94);
  EXPECT_EQ(c.receiver.waveform.plateau_ps, default_receiver().waveform.plateau_ps);
  EXPECT_EQ(c.keyrate.f_ec, 1.10);
  EXPECT_EQ(c.seed, 1u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"receiver", {{"colour", "red"}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"receiver", {{"mode", "three-state"}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"receiver", {{"visibility", "high"}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"seed", -3}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"eve", {{"p1", 2.0}, {"kind", "two-point"}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"attack", {{"qber_cap", 0.7}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"keyrate", {{"source", "guess"}}}}), ConfigError);
}

TEST(Config, OverridesUseDottedKeys) {
  json doc = json::object();
  apply_override(doc, "receiver.mode=four-state");
  apply_override(doc, "sweep.n_pulses=42");
  apply_override(doc, "receiver.waveform.plateau_ps=300");
  apply_override(doc, "output.records=true");
  const RunConfig c = parse_config(doc);
  EXPECT_EQ(c.receiver.mode, DemodulationMode::FourState);
  EXPECT_EQ(c.sweep.n_pulses, 42u);
  EXPECT_EQ(c.receiver.waveform.plateau_ps, 300.0);
  EXPECT_TRUE(c.write_records);
  EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(doc, "a..b=1"), ConfigError);
}

TEST(Config, MissingCurveFileIsAConfigError) {
  const RunConfig c = parse_config(json{{"curves", {{"csv", "/nonexistent/curves.csv"}}}});
  EXPECT_THROW(load_pair(c), ConfigError);
}

TEST(Config, CurveFileIsResampledToConfiguredGrid) {
  const auto dir = fresh_dir("curves");
  save_curves_csv(severe_mismatch_fixture(), dir / "curves.csv");
  const RunConfig c = parse_config(json{{"curves", {{"csv", (dir / "curves.csv").string()}, {"dt_ps", 49.5}}}});
  const auto pair = load_pair(c);
  EXPECT_EQ(pair.size(), 20u);
  EXPECT_NEAR(pair.apd0[9], severe_mismatch_fixture().apd0[99], 1e-9);
}

TEST(SweepCsv, RoundTrip) {
  std::vector<SweepPoint> table{{-4.5, {3, 1, 4, 1, 100}}, {0.0, {0, 0, 0, 0, 100}}};
  const auto dir = fresh_dir("sweep_rt");
  std::ofstream(dir / "sweep.csv") << sweep_csv(table);
  const auto back = read_sweep_csv(dir / "sweep.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].shift_ps, -4.5);
  EXPECT_EQ(back[0].counts.c0, 3u);
  EXPECT_EQ(back[0].counts.errors, 1u);
  EXPECT_EQ(back[1].counts.sifted, 0u);
  EXPECT_NE(sweep_csv(table).find("nan,nan"), std::string::npos);
}

TEST(Characterize, FullCycleTableAndDeterminism) {
  const auto dir_a = fresh_dir("char_a");
  const auto dir_b = fresh_dir("char_b");
  std::ostringstream out_a, out_b;
  EXPECT_EQ(cmd_characterize(small_config(dir_a), out_a), kExitOk);
  EXPECT_EQ(cmd_characterize(small_config(dir_b), out_b), kExitOk);
  const auto table = read_sweep_csv(dir_a / "sweep.csv");
  EXPECT_EQ(table.size(), 223u);
  EXPECT_EQ(slurp(dir_a / "sweep.csv"), slurp(dir_b / "sweep.csv"));
  EXPECT_EQ(out_a.str(), out_b.str());
  const auto summary = json::parse(slurp(dir_a / "characterize.json"));
  EXPECT_EQ(summary.at("rows").get<int>(), 223);
}

TEST(Attack, ReportsOptimalPlanAndSession) {
  const auto dir = fresh_dir("attack");
  RunConfig c = small_config(dir);
  c.write_records = true;
  c.attack.step_ps = 49.5;
  std::ostringstream out;
  const int code = cmd_attack(c, out);
  EXPECT_TRUE(code == kExitOk || code == kExitAborted);
  const auto doc = json::parse(slurp(dir / "attack.json"));
  EXPECT_TRUE(doc.at("plan").at("found").get<bool>());
  EXPECT_GT(doc.at("plan").at("eve_info_bits").get<double>(), 0.1);
  EXPECT_LE(doc.at("plan").at("predicted_qber").get<double>(), 0.11);
  EXPECT_EQ(doc.at("session").at("n_pulses").get<int>(), 20000);
  std::ifstream records(dir / "records.jsonl");
  int lines = 0;
  for (std::string line; std::getline(records, line);) ++lines;
  EXPECT_EQ(lines, 20000);
}

TEST(Attack, MatchedCurvesLeakNothing) {
  const auto dir = fresh_dir("attack_matched");
  RunConfig c = small_config(dir);
  c.curves.fixture = "matched";
  c.attack.step_ps = 49.5;
  std::ostringstream out;
  cmd_attack(c, out);
  EXPECT_EQ(json::parse(slurp(dir / "attack.json")).at("plan").at("eve_info_bits").get<double>(), 0.0);
}

TEST(Keyrate, ReportJsonRoundTrips) {
  const auto dir = fresh_dir("keyrate");
  std::ostringstream out;
  EXPECT_EQ(cmd_keyrate(small_config(dir), out), kExitOk);
  const auto doc = json::parse(slurp(dir / "keyrate.json"));
  for (const char* key : {"fine", "coarse"}) {
    const auto& r = doc.at(key);
    for (const char* field : {"mode", "dt_ps", "p_succ", "e_phase", "e_bit", "rate", "feasible_bins", "solver"}) {
      EXPECT_TRUE(r.contains(field)) << field;
    }
    EXPECT_EQ(to_json(key_rate_report_from_json(r)), r);
  }
}

TEST(Keyrate, InfeasibleBoundsGiveExitThree) {
  const auto dir = fresh_dir("keyrate_infeasible");
  RunConfig c = small_config(dir);
  c.keyrate.per_bin_error = true;
  c.keyrate.e_bit_obs = 0.2;
  std::ostringstream out;
  EXPECT_EQ(cmd_keyrate(c, out), kExitInfeasible);
}

TEST(SweepLoss, CsvRoundTripAndShape) {
  const auto dir = fresh_dir("loss");
  std::ostringstream out;
  EXPECT_EQ(cmd_sweep_loss(small_config(dir), out), kExitOk);
  const auto rows = read_loss_csv(dir / "loss.csv");
  ASSERT_EQ(rows.size(), 121u);
  EXPECT_EQ(rows, loss_table(small_config(dir).loss));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].rate_ideal, rows[i - 1].rate_ideal);
    EXPECT_LE(rows[i].rate_two_state, rows[i - 1].rate_two_state);
    EXPECT_LE(rows[i].rate_four_state, rows[i - 1].rate_four_state);
  }
  EXPECT_EQ(rows.back().rate_ideal, 0.0);
}

TEST(Tool, ExitCodes) {
  const auto dir = fresh_dir("tool");
  const std::string out = " -o " + dir.string();
  EXPECT_EQ(run_tool("sweep-loss" + out), 0);
  EXPECT_EQ(run_tool("characterize --curves /nonexistent.csv" + out), 2);
  EXPECT_EQ(run_tool("characterize --set nope=1" + out), 2);
  EXPECT_EQ(run_tool("keyrate --set keyrate.per_bin_error=true --set keyrate.e_bit_obs=0.2" + out), 3);
  EXPECT_EQ(run_tool("attack -n 10 --set attack.n_pulses=2000 --set keyrate.abort_threshold=0.05 "
                     "--set attack.step_ps=49.5" + out), 4);
  EXPECT_EQ(run_tool("oracle" + out), 0);
  EXPECT_NE(run_tool("frobnicate"), 0);
}

TEST(Tool, SameSeedSameBytes) {
  const auto a = fresh_dir("bytes_a");
  const auto b = fresh_dir("bytes_b");
  const std::string args = "characterize -n 2000 --seed 7 --mode four-state --set sweep.step_ps=49.5 -o ";
  ASSERT_EQ(run_tool(args + a.string()), 0);
  ASSERT_EQ(run_tool(args + b.string()), 0);
  EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
  EXPECT_EQ(slurp(a / "characterize.json"), slurp(b / "characterize.json"));
}

TEST(Tool, PulseCountFlagTargetsTheSubcommand) {
  const auto dir = fresh_dir("n_pulses");
  const auto out = (dir / "config.json").string();
  auto effective = [&](const std::string& sub) {
    const std::string cmd = std::string(QKDSIM_PATH) + " " + sub + " -n 1234 --print-config > " + out;
    EXPECT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
    return json::parse(slurp(out));
  };
  EXPECT_EQ(effective("characterize")["sweep"]["n_pulses"], 1234);
  const json attack = effective("attack");
  EXPECT_EQ(attack["attack"]["n_pulses"], 1234);
  EXPECT_EQ(attack["sweep"]["n_pulses"], 100000);
  EXPECT_EQ(effective("keyrate")["keyrate"]["n_pulses"], 1234);
}
