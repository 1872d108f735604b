#include "qkd/validators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qkd/attack.hpp"
#include "qkd/commands.hpp"
#include "qkd/oracles.hpp"

namespace qkd {

std::vector<ValidatorCheck> run_validators(const RunConfig& config) {
  std::vector<ValidatorCheck> checks;
  Rng rng = derived_rng(config.seed, 0);

  {
    ValidatorCheck lp{"lp_vs_vertex_enumeration", 0.0, 1e-6, 0, true};
    ValidatorCheck chain{"conservativity_chain", 0.0, 1e-12, 0, true};
    for (int i = 0; i < 400; ++i) {
      const auto inst = oracle::random_lp_instance(rng, 1 + static_cast<std::size_t>(i % 8));
      const Bounds got = solve_bounds(inst.model, inst.e_bit_obs);
      const oracle::VertexBounds want = oracle::vertex_enumeration(inst.model, inst.e_bit_obs);
      ++lp.cases;
      if (got.feasible != want.feasible) {
        lp.pass = false;
        lp.max_error = std::max(lp.max_error, 1.0);
        continue;
      }
      if (!got.feasible) continue;
      lp.max_error = std::max({lp.max_error, std::abs(got.p_succ_min - want.p_succ_min),
                               std::abs(got.e_phase_max - want.e_phase_max)});

      // Same support, e_phase_obs = e_bit_obs: the bin-agnostic bound, the
      // per-bin bound and the no-mismatch rate must be ordered.
      const double p_free = *std::min_element(inst.model.success.begin(), inst.model.success.end());
      const double r_analytic =
          secret_key_rate(p_free, analytic_phase_bound(p_free, inst.e_bit_obs), inst.e_bit_obs);
      BinModel scaled = inst.model;
      for (std::size_t t = 0; t < scaled.phase_error.size(); ++t) {
        scaled.phase_error[t] = scaled.bit_error[t];
      }
      const Bounds refined = solve_bounds(scaled, inst.e_bit_obs);
      if (!refined.feasible) continue;
      const double r_lp = secret_key_rate(refined.p_succ_min, refined.e_phase_max, inst.e_bit_obs);
      const double r_ideal = secret_key_rate(1.0, inst.e_bit_obs, inst.e_bit_obs);
      ++chain.cases;
      const double violation = std::max(r_analytic - r_lp, r_lp - r_ideal);
      chain.max_error = std::max(chain.max_error, std::max(0.0, violation));
    }
    lp.pass = lp.pass && lp.max_error <= lp.tolerance;
    chain.pass = chain.max_error <= chain.tolerance;
    checks.push_back(lp);
    checks.push_back(chain);
  }

  {
    ValidatorCheck clicks{"click_probabilities_vs_enumeration", 0.0, 1e-12, 0, true};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 2000; ++i) {
      const double pa = angle(rng);
      const double pb = angle(rng);
      const double v = unit(rng);
      const double e0 = unit(rng);
      const double e1 = unit(rng);
      const double d0 = 0.1 * unit(rng);
      const double d1 = 0.1 * unit(rng);
      const ClickProbabilities a = click_probabilities(pa, pb, v, e0, e1, d0, d1);
      const ClickProbabilities b = oracle::enumerate_clicks(pa, pb, v, e0, e1, d0, d1);
      ++clicks.cases;
      clicks.max_error = std::max({clicks.max_error, std::abs(a.det0 - b.det0),
                                   std::abs(a.det1 - b.det1), std::abs(a.both - b.both),
                                   std::abs(a.none - b.none)});
    }
    clicks.pass = clicks.max_error <= clicks.tolerance;
    checks.push_back(clicks);
  }

  {
    ValidatorCheck outcome{"expected_outcome_vs_enumeration", 0.0, 1e-12, 0, true};
    const DetectorPair pair = load_pair(config);
    for (DemodulationMode mode : {DemodulationMode::TwoState, DemodulationMode::FourState}) {
      ReceiverConfig rx = config.receiver;
      rx.mode = mode;
      for (double s : sweep_grid(config.sweep.range_ps, config.sweep.step_ps)) {
        const ShiftOutcome a = expected_outcome(pair, rx, s);
        const ShiftOutcome b = oracle::enumerate_outcome(pair, rx, s);
        ++outcome.cases;
        double err = std::max(std::abs(a.sifted - b.sifted), std::abs(a.errors - b.errors));
        for (int d = 0; d < 2; ++d) err = std::max(err, std::abs(a.logical[d] - b.logical[d]));
        outcome.max_error = std::max(outcome.max_error, err);
      }
    }
    outcome.pass = outcome.max_error <= outcome.tolerance;
    checks.push_back(outcome);
  }

  {
    ValidatorCheck h2{"binary_entropy_vs_50_digit", 0.0, 1e-14, 0, true};
    for (int i = 0; i <= 1000; ++i) {
      const double x = i / 1000.0;
      ++h2.cases;
      h2.max_error = std::max(h2.max_error, std::abs(binary_entropy(x) - oracle::binary_entropy_precise(x)));
    }
    h2.pass = h2.max_error <= h2.tolerance;
    checks.push_back(h2);
  }
  return checks;
}

int cmd_oracle(const RunConfig& config, std::ostream& out) {
  const auto checks = run_validators(config);
  nlohmann::json doc{{"command", "oracle"}, {"seed", config.seed}, {"checks", nlohmann::json::array()}};
  bool all = true;
  for (const auto& c : checks) {
    doc["checks"].push_back({{"name", c.name},
                             {"cases", c.cases},
                             {"max_error", c.max_error},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass}});
    all = all && c.pass;
  }
  doc["pass"] = all;
  std::filesystem::create_directories(config.output_dir);
  std::ofstream(config.output_dir / "oracle.json") << doc.dump(2) << '\n';
  out << doc.dump(2) << '\n';
  return all ? kExitOk : kExitFailure;
}

}  // namespace qkd
