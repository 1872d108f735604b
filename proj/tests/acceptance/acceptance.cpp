// One line per acceptance criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "qkd/attack.hpp"
#include "qkd/commands.hpp"
#include "qkd/fixtures.hpp"
#include "qkd/keyrate.hpp"
#include "qkd/oracles.hpp"
#include "qkd/statistics.hpp"

using namespace qkd;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr std::uint64_t kPulsesPerPoint = 1'000'000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

template <typename F>
void run(const char* id, const char* name, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  const Outcome o = f();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] %s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

Outcome key_rate_regression() {
  struct Case {
    double p, e, want;
  };
  const Case cases[] = {{0.609, 0.0475, 0.227}, {0.981, 0.0302, 0.575}, {0.608, 0.0470, 0.228},
                        {0.979, 0.0303, 0.574}, {1.0, 0.03, 0.592}};
  Outcome o;
  double worst = 0.0;
  for (const Case& c : cases) worst = std::max(worst, std::abs(secret_key_rate(c.p, c.e, 0.03, 1.10) - c.want));
  o.pass = worst <= 0.001;
  o.detail = fmt::format("{} cases, max |R - R_table| = {:.5f} (tol 0.001), R_ideal = {:.4f}", std::size(cases),
                         worst, secret_key_rate(1.0, 0.03, 0.03, 1.10));
  return o;
}

Outcome countermeasure_symmetrization() {
  Outcome o;
  const auto rx4 = default_receiver(DemodulationMode::FourState);
  const auto grid = sweep_grid(1000.0, 4.5);
  const auto p1s = default_p1_grid();
  Rng rng = derived_rng(kSeed, 2);
  int unequal_bins = 0;
  long nonzero_info = 0;
  long evaluated = 0;
  double max_physical_info = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto pair = oracle::random_pair(rng, 220, 4.5, 0.0, 1.0, 1e-5 * (trial % 3));
    const auto logical = logical_curves(pair, DemodulationMode::FourState);
    for (std::size_t j = 0; j < logical.size(); ++j) unequal_bins += logical.apd0[j] != logical.apd1[j];
    std::vector<ShiftOutcome> outcomes;
    std::vector<ShiftOutcome> physical;
    for (double s : grid) {
      outcomes.push_back(expected_outcome(logical, rx4, s));
      physical.push_back(expected_outcome(pair, rx4, s));
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i; j < grid.size(); ++j) {
        for (double p1 : p1s) {
          ++evaluated;
          nonzero_info += mutual_information_bits(outcomes[i], outcomes[j], p1) != 0.0;
          max_physical_info = std::max(max_physical_info, mutual_information_bits(physical[i], physical[j], p1));
        }
      }
    }
  }
  const auto plan = optimize_shift_pair(severe_mismatch_fixture(), default_receiver(), 0.11, grid);
  o.pass = unequal_bins == 0 && nonzero_info == 0 && plan.found && plan.eve_info_bits > 0.1 &&
           plan.predicted_qber <= 0.11;
  o.detail = fmt::format(
      "four-state: {} unequal logical bins, {} of {} strategies with nonzero info "
      "(physical-pair max {:.2e} bits, rounding, info); "
      "two-state severe: {:.4f} bits at (t1 {}, t2 {}, p1 {:.3f}), predicted QBER {:.4f}",
      unequal_bins, nonzero_info, evaluated, max_physical_info, plan.eve_info_bits, plan.t1_ps, plan.t2_ps,
      plan.p1,
      plan.predicted_qber);
  return o;
}

struct SweepData {
  std::vector<double> shifts;
  std::vector<SweepPoint> points[2];
};

const SweepData& severe_sweeps() {
  static const SweepData data = [] {
    SweepData d;
    d.shifts = sweep_grid(1000.0, 4.5);
    const auto pair = severe_mismatch_fixture();
    for (int m = 0; m < 2; ++m) {
      const auto mode = m == 0 ? DemodulationMode::TwoState : DemodulationMode::FourState;
      d.points[m] = sweep_characterization(pair, default_receiver(mode), d.shifts, kPulsesPerPoint,
                                           kSeed + static_cast<std::uint64_t>(m), 0);
    }
    return d;
  }();
  return data;
}

Outcome monte_carlo_vs_analytic() {
  Outcome o;
  const auto& data = severe_sweeps();
  const auto pair = severe_mismatch_fixture();
  const double n = static_cast<double>(kPulsesPerPoint);
  double worst_z = 0.0;
  double worst_four_bias_z = 0.0;
  int window_points = 0;
  double max_two_bias = 0.0;
  for (int m = 0; m < 2; ++m) {
    const auto rx = default_receiver(m == 0 ? DemodulationMode::TwoState : DemodulationMode::FourState);
    for (const SweepPoint& p : data.points[m]) {
      if (p.counts.sifted == 0) continue;
      const auto e = expected_outcome(pair, rx, p.shift_ps);
      const double s_exp = n * e.sifted;
      const double q = e.qber();
      const double b = e.bias();
      const double z_q = std::abs(qber(p.counts) - q) / std::sqrt(q * (1 - q) / s_exp);
      const double z_b = std::abs(bias_contrast(p.counts) - b) / std::sqrt((1 - b * b) / s_exp);
      worst_z = std::max({worst_z, z_q, z_b});
      if (std::abs(p.shift_ps) > 247.5 + 1e-9) continue;
      if (m == 1) {
        ++window_points;
        worst_four_bias_z = std::max(worst_four_bias_z, std::abs(bias_contrast(p.counts)) * std::sqrt(s_exp));
      } else {
        max_two_bias = std::max(max_two_bias, std::abs(bias_contrast(p.counts)));
      }
    }
  }
  o.pass = worst_z <= 4.0 && worst_four_bias_z <= 3.0 && std::abs(max_two_bias - 0.3) <= 0.05;
  o.detail = fmt::format(
      "{} points x {} pulses per mode; worst |z| QBER/bias {:.2f} (tol 4); four-state worst |bias|/sigma "
      "{:.2f} over {} window points (tol 3); two-state max |bias| in window {:.4f} (0.30 +- 0.05)",
      data.shifts.size(), kPulsesPerPoint, worst_z, worst_four_bias_z, window_points, max_two_bias);
  return o;
}

Outcome droop_calibration() {
  Outcome o;
  const auto pair = flat_fixture(0.2, 0.2, 4.5, 1e-5);
  Rng rng = derived_rng(kSeed, 4);
  const auto c = run_session(pair, default_receiver(), EveStrategy::fixed(499.5), kPulsesPerPoint, rng);
  const double q500 = qber(c);

  const auto& data = severe_sweeps();
  bool contiguous = true;
  std::string windows;
  for (int m = 0; m < 2; ++m) {
    std::vector<double> inside;
    for (const SweepPoint& p : data.points[m]) {
      if (p.counts.sifted > 0 && !abort_check(qber(p.counts))) inside.push_back(p.shift_ps);
    }
    bool ok = !inside.empty() && inside.front() <= 0.0 && inside.back() >= 0.0;
    for (std::size_t i = 1; i < inside.size(); ++i) ok = ok && std::abs(inside[i] - inside[i - 1] - 4.5) < 1e-9;
    contiguous = contiguous && ok;
    windows += fmt::format("{}{} [{}, {}] ({} pts{})", m ? "; " : "", m ? "four-state" : "two-state",
                           inside.empty() ? 0.0 : inside.front(), inside.empty() ? 0.0 : inside.back(),
                           inside.size(), ok ? "" : ", NOT contiguous");
  }
  o.pass = std::abs(q500 - 0.5) <= 0.02 && contiguous;
  o.detail = fmt::format("QBER at 499.5 ps = {:.4f} (0.50 +- 0.02) from {} sifted; QBER <= 11% windows: {}", q500,
                         c.sifted, windows);
  return o;
}

Outcome optimizer_vs_oracle() {
  Outcome o;
  Rng rng = derived_rng(kSeed, 5);
  std::uniform_real_distribution<double> err(0.001, 0.2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int instances = 0;
  int infeasible = 0;
  int feasibility_mismatch = 0;
  int chain_violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t bins = 1 + static_cast<std::size_t>(trial % 8);
    const auto pair = oracle::random_pair(rng, bins, 1.0, 0.02, 1.0);
    std::vector<double> e(bins);
    for (auto& x : e) x = err(rng);
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    const double e_obs = trial % 10 == 9 ? *hi + 0.01 : *lo + unit(rng) * (*hi - *lo);
    const double e_phase_obs = std::min(0.5, e_obs * (0.5 + unit(rng)));

    std::vector<std::size_t> all(bins);
    for (std::size_t i = 0; i < bins; ++i) all[i] = i;
    const Bounds got = optimize_bounds(KeyRateInputs{pair, e_obs, e_phase_obs, 1.10, e}, all);

    BinModel model;
    for (std::size_t t = 0; t < bins; ++t) {
      model.success.push_back(*procrustean_success(pair.apd0[t], pair.apd1[t]));
      model.bit_error.push_back(e[t]);
      model.phase_error.push_back(std::min(1.0, e[t] * (e_phase_obs / e_obs)));
    }
    const auto want = oracle::vertex_enumeration(model, e_obs);
    ++instances;
    if (got.feasible != want.feasible) {
      ++feasibility_mismatch;
      continue;
    }
    if (!got.feasible) {
      ++infeasible;
      continue;
    }
    worst = std::max({worst, std::abs(got.p_succ_min - want.p_succ_min),
                      std::abs(got.e_phase_max - want.e_phase_max)});

    const Bounds flat = optimize_bounds(KeyRateInputs{pair, e_obs, e_phase_obs, 1.10, {}}, all);
    const double r_analytic =
        secret_key_rate(flat.p_succ_min, analytic_phase_bound(flat.p_succ_min, e_phase_obs), e_obs);
    const double r_lp = secret_key_rate(got.p_succ_min, got.e_phase_max, e_obs);
    const double r_ideal = secret_key_rate(1.0, e_phase_obs, e_obs);
    if (r_analytic > r_lp + 1e-12 || r_lp > r_ideal + 1e-12) ++chain_violations;
  }
  o.pass = instances >= 200 && feasibility_mismatch == 0 && worst <= 1e-6 && chain_violations == 0;
  o.detail = fmt::format(
      "{} instances with <= 8 bins ({} infeasible, {} feasibility mismatches); max |LP - vertex| = {:.2e} "
      "(tol 1e-6); conservativity violations {}",
      instances, infeasible, feasibility_mismatch, worst, chain_violations);
  return o;
}

Outcome resolution_robustness() {
  Outcome o;
  double worst = 0.0;
  std::string rows;
  for (const char* name : {"band-limited", "severe"}) {
    const auto pair = fixture_by_name(name);
    for (DemodulationMode mode : {DemodulationMode::TwoState, DemodulationMode::FourState}) {
      const auto [fine, coarse] = resolution_comparison(pair, default_receiver(mode), 4.5, 49.5, {});
      worst = std::max(worst, std::abs(fine.rate - coarse.rate));
      o.pass = o.pass && fine.feasible && coarse.feasible;
      rows += fmt::format("{} {}: R {:.4f}/{:.4f}; ", name, to_string(mode), fine.rate, coarse.rate);
    }
  }
  KeyRateSettings measured;
  measured.source = EfficiencySource::Measured;
  measured.n_pulses = kPulsesPerPoint;
  measured.seed = kSeed;
  const auto [mf, mc] = resolution_comparison(band_limited_fixture(), default_receiver(), 4.5, 49.5, measured);
  o.pass = o.pass && worst <= 0.005;
  o.detail = fmt::format("{}max |dR| = {:.5f} (tol 0.005); measured-source two-state dR = {:.5f} (info)", rows,
                         worst, std::abs(mf.rate - mc.rate));
  return o;
}

Outcome loss_sweep_ratios() {
  Outcome o;
  std::string detail;
  LossSettings s;
  const std::pair<ModeBounds, ModeBounds> inputs[] = {{{0.609, 0.0475}, {0.981, 0.0302}},
                                                      {{0.608, 0.0470}, {0.979, 0.0303}}};
  for (const auto& [two, four] : inputs) {
    s.two_state = two;
    s.four_state = four;
    const auto rows = loss_table(s);
    const double r2 = rows.front().rate_two_state / rows.front().rate_ideal;
    const double r4 = rows.front().rate_four_state / rows.front().rate_ideal;
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      monotone = monotone && rows[i].rate_two_state <= rows[i - 1].rate_two_state &&
                 rows[i].rate_four_state <= rows[i - 1].rate_four_state &&
                 rows[i].rate_ideal <= rows[i - 1].rate_ideal;
    }
    const bool cutoff = rows.front().rate_two_state > 0 && rows.front().rate_four_state > 0 &&
                        rows.back().rate_two_state == 0 && rows.back().rate_four_state == 0;
    double last2 = 0.0;
    double last4 = 0.0;
    for (const auto& r : rows) {
      if (r.rate_two_state > 0) last2 = r.loss_db;
      if (r.rate_four_state > 0) last4 = r.loss_db;
    }
    o.pass = o.pass && std::abs(r4 - 0.971) <= 0.005 && std::abs(r2 - 0.383) <= 0.005 && monotone && cutoff;
    detail += fmt::format("inputs {}/{}: ratio two {:.4f} four {:.4f}, monotone {}, last positive {}/{} dB; ",
                          two.p_succ, four.p_succ, r2, r4, monotone ? "yes" : "no", last2, last4);
  }
  o.detail = detail + "targets 0.383/0.971 +- 0.005";
  return o;
}

}  // namespace

int main() {
  run("C1", "key-rate regression", key_rate_regression);
  run("C2", "countermeasure symmetrization", countermeasure_symmetrization);
  run("C3", "Monte Carlo vs analytic", monte_carlo_vs_analytic);
  run("C4", "droop calibration", droop_calibration);
  run("C5", "optimizer vs oracle", optimizer_vs_oracle);
  run("C6", "resolution robustness", resolution_robustness);
  run("C7", "loss-sweep ratios", loss_sweep_ratios);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
