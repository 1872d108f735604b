#include "qkd/keyrate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qkd/attack.hpp"
#include "qkd/error.hpp"
#include "qkd/lp.hpp"

namespace qkd {

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(fmt::format("H2 argument {} outside [0, 1]", x));
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double static_prefactor(double eta0, double eta1) {
  if (!(eta0 > 0.0) || !(eta1 > 0.0)) throw ValidationError("efficiencies must be positive");
  return std::min(eta0, eta1) / (eta0 + eta1);
}

std::optional<double> procrustean_success(double eta0, double eta1) {
  if (!(eta0 >= 0.0) || !(eta1 >= 0.0)) throw ValidationError("efficiencies must be non-negative");
  if (eta0 == 0.0 && eta1 == 0.0) return std::nullopt;
  if (eta0 == eta1) return 1.0;
  return 2.0 * std::min(eta0, eta1) / (eta0 + eta1);
}

double secret_key_rate(double p_succ, double e_phase, double e_bit, double f_ec) {
  if (!(p_succ >= 0.0 && p_succ <= 1.0)) throw ValidationError("p_succ must lie in [0, 1]");
  if (!(f_ec >= 1.0)) throw ValidationError("f_ec must be at least 1");
  const double r = p_succ * (1.0 - binary_entropy(e_phase)) - f_ec * binary_entropy(e_bit);
  return std::max(0.0, r);
}

double analytic_phase_bound(double p_succ, double e_phase_obs) {
  if (!(p_succ > 0.0 && p_succ <= 1.0)) throw ValidationError("p_succ must lie in (0, 1]");
  if (!(e_phase_obs >= 0.0 && e_phase_obs <= 0.5)) {
    throw ValidationError("e_phase_obs must lie in [0, 0.5]");
  }
  return std::min(0.5, e_phase_obs / p_succ);
}

void BinModel::validate() const {
  if (success.empty()) throw ValidationError("bin model has no bins");
  if (bit_error.size() != success.size() || phase_error.size() != success.size()) {
    throw ValidationError("bin model vectors differ in length");
  }
  for (std::size_t i = 0; i < success.size(); ++i) {
    if (!(success[i] > 0.0 && success[i] <= 1.0)) {
      throw ValidationError(fmt::format("bin {} success {} outside (0, 1]", i, success[i]));
    }
    if (!(bit_error[i] >= 0.0 && bit_error[i] <= 1.0) ||
        !(phase_error[i] >= 0.0 && phase_error[i] <= 1.0)) {
      throw ValidationError(fmt::format("bin {} error rate outside [0, 1]", i));
    }
  }
}

Bounds solve_bounds(const BinModel& model, double e_bit_obs) {
  model.validate();
  const std::size_t n = model.success.size();
  Bounds out;

  // min sum q p  s.t.  sum q = 1, sum q e = e_obs.
  LinearProgram primal = make_program(2, n);
  for (std::size_t t = 0; t < n; ++t) {
    primal.at(0, t) = 1.0;
    primal.at(1, t) = model.bit_error[t];
    primal.c[t] = model.success[t];
  }
  primal.b = {1.0, e_bit_obs};
  const LpSolution success = solve_simplex(primal);
  out.iterations = success.iterations;
  if (success.status != LpStatus::Optimal) return out;

  // max sum y e_ph  s.t.  sum y p = 1, sum y e - e_obs tau = 0, sum y - tau = 0,
  // with y = q / sum q p and tau = 1 / sum q p.
  LinearProgram ratio = make_program(3, n + 1);
  for (std::size_t t = 0; t < n; ++t) {
    ratio.at(0, t) = model.success[t];
    ratio.at(1, t) = model.bit_error[t];
    ratio.at(2, t) = 1.0;
    ratio.c[t] = -model.phase_error[t];
  }
  ratio.at(1, n) = -e_bit_obs;
  ratio.at(2, n) = -1.0;
  ratio.b = {1.0, 0.0, 0.0};
  const LpSolution phase = solve_simplex(ratio);
  out.iterations += phase.iterations;
  if (phase.status != LpStatus::Optimal || !(phase.x[n] > 0.0)) return out;

  out.feasible = true;
  out.p_succ_min = success.objective;
  out.q_success = success.x;
  out.e_phase_max = std::min(0.5, -phase.objective);
  out.q_phase.assign(phase.x.begin(), phase.x.begin() + static_cast<long>(n));
  for (double& q : out.q_phase) q /= phase.x[n];
  return out;
}

Bounds optimize_bounds(const KeyRateInputs& inputs, std::span<const std::size_t> feasible_bins) {
  if (feasible_bins.empty()) throw ValidationError("feasible bin set is empty");
  if (!(inputs.e_bit_obs > 0.0 && inputs.e_bit_obs <= 0.5) ||
      !(inputs.e_phase_obs >= 0.0 && inputs.e_phase_obs <= 0.5)) {
    throw ValidationError("observed error rates must lie in (0, 0.5]");
  }
  const bool per_bin = !inputs.bin_bit_error.empty();
  if (per_bin && inputs.bin_bit_error.size() != inputs.pair.size()) {
    throw ValidationError("per-bin error model does not match the curve grid");
  }
  const double phase_scale = inputs.e_phase_obs / inputs.e_bit_obs;

  BinModel model;
  for (std::size_t bin : feasible_bins) {
    if (bin >= inputs.pair.size()) throw ValidationError(fmt::format("bin {} out of range", bin));
    const auto p = procrustean_success(inputs.pair.apd0[bin], inputs.pair.apd1[bin]);
    if (!p || *p <= 0.0) continue;
    const double e = per_bin ? inputs.bin_bit_error[bin] : inputs.e_bit_obs;
    model.success.push_back(*p);
    model.bit_error.push_back(e);
    model.phase_error.push_back(std::min(1.0, e * phase_scale));
  }
  if (model.success.empty()) return Bounds{};
  return solve_bounds(model, inputs.e_bit_obs);
}

namespace {

double centered_shift(std::size_t bin, double dt_ps, double period_ps, double arrival_ps) {
  double s = static_cast<double>(bin) * dt_ps - arrival_ps;
  const double half = 0.5 * period_ps;
  const double eps = 1e-9 * period_ps;
  while (s > half + eps) s -= period_ps;
  while (s <= -half + eps) s += period_ps;
  return s;
}

}  // namespace

KeyRateReport evaluate_key_rate(const DetectorPair& physical, const ReceiverConfig& receiver,
                                const KeyRateSettings& settings) {
  receiver.validate();
  KeyRateReport report;
  report.mode = receiver.mode;
  report.dt_ps = physical.dt_ps();
  report.e_bit = settings.e_bit_obs;

  const std::size_t n = physical.size();
  std::vector<std::size_t> bins;
  std::vector<double> predicted(n, 0.5);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = centered_shift(j, physical.dt_ps(), physical.period_ps(), receiver.arrival_ps);
    const ShiftOutcome o = expected_outcome(physical, receiver, s);
    if (!(o.sifted > 0.0)) continue;
    const std::size_t bin = physical.apd0.bin_at(receiver.arrival_ps + s);
    predicted[bin] = o.qber();
    if (!abort_check(predicted[bin], settings.abort_threshold)) {
      bins.push_back(bin);
      report.feasible_shifts.push_back(s);
    }
  }
  if (bins.empty()) return report;

  KeyRateInputs inputs{logical_curves(physical, receiver.mode), settings.e_bit_obs,
                       settings.e_phase_obs, settings.f_ec, {}};
  if (settings.per_bin_error) inputs.bin_bit_error = predicted;

  if (settings.source == EfficiencySource::Measured) {
    const auto sweep = sweep_characterization(physical, receiver, report.feasible_shifts,
                                              settings.n_pulses, settings.seed, settings.threads);
    std::vector<double> eta0(n, 0.0);
    std::vector<double> eta1(n, 0.0);
    std::vector<double> measured(n, 0.5);
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const CountsSummary& c = sweep[i].counts;
      const double pulses = static_cast<double>(c.n_pulses);
      eta0[bins[i]] = static_cast<double>(c.c0) / pulses;
      eta1[bins[i]] = static_cast<double>(c.c1) / pulses;
      if (c.sifted > 0) measured[bins[i]] = qber(c);
    }
    const double dt = physical.dt_ps();
    const double period = physical.period_ps();
    inputs.pair = DetectorPair{GateEfficiencyCurve(eta0, dt, period, 0.0),
                               GateEfficiencyCurve(eta1, dt, period, 0.0)};
    if (settings.per_bin_error) inputs.bin_bit_error = measured;
  }

  const Bounds bounds = optimize_bounds(inputs, bins);
  report.iterations = bounds.iterations;
  if (!bounds.feasible) return report;
  report.feasible = true;
  report.p_succ = bounds.p_succ_min;
  report.e_phase = bounds.e_phase_max;
  report.rate = secret_key_rate(report.p_succ, report.e_phase, report.e_bit, settings.f_ec);
  return report;
}

std::pair<KeyRateReport, KeyRateReport> resolution_comparison(const DetectorPair& pair,
                                                              const ReceiverConfig& receiver,
                                                              double dt_fine_ps,
                                                              double dt_coarse_ps,
                                                              const KeyRateSettings& settings) {
  const DetectorPair fine = resample(pair, dt_fine_ps);
  const DetectorPair coarse = resample(pair, dt_coarse_ps);
  return {evaluate_key_rate(fine, receiver, settings), evaluate_key_rate(coarse, receiver, settings)};
}

std::vector<LossPoint> rate_vs_loss(const ModeBounds& bounds, std::span<const double> loss_grid_db,
                                    const LossModel& model) {
  if (!(model.detector_efficiency > 0.0 && model.detector_efficiency <= 1.0)) {
    throw ValidationError("detector efficiency must lie in (0, 1]");
  }
  if (!(model.dark_prob_total >= 0.0 && model.dark_prob_total < 1.0)) {
    throw ValidationError("dark count probability must lie in [0, 1)");
  }
  if (!(model.e_optical > 0.0 && model.e_optical < 0.5)) {
    throw ValidationError("optical error must lie in (0, 0.5)");
  }
  std::vector<LossPoint> curve;
  curve.reserve(loss_grid_db.size());
  for (double loss : loss_grid_db) {
    if (!(loss >= 0.0)) throw ValidationError("loss must be non-negative");
    const double p_sig = std::pow(10.0, -loss / 10.0) * model.detector_efficiency;
    const double p_click = p_sig + model.dark_prob_total;
    const double e = (model.e_optical * p_sig + 0.5 * model.dark_prob_total) / p_click;
    const double e_phase = std::min(0.5, e * bounds.e_phase / model.e_optical);
    curve.push_back({loss, p_click * secret_key_rate(bounds.p_succ, e_phase, e, model.f_ec)});
  }
  return curve;
}

}  // namespace qkd
