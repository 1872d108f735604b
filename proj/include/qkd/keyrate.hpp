#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qkd/detector_model.hpp"
#include "qkd/protocol.hpp"
#include "qkd/statistics.hpp"

namespace qkd {

inline constexpr double kDefaultErrorCorrection = 1.10;

/// H2(x) in bits, with 0 log 0 = 0.
double binary_entropy(double x);

/// Key-rate prefactor for a static efficiency mismatch: min / (eta0 + eta1).
double static_prefactor(double eta0, double eta1);

/// Probability that a detected event in one bin survives the filter that
/// equalizes the two detectors: 2 min / (eta0 + eta1). Empty when both
/// efficiencies are zero, so the bin cannot produce detections.
std::optional<double> procrustean_success(double eta0, double eta1);

/// max(0, p_succ (1 - H2(e_phase)) - f_ec H2(e_bit)).
double secret_key_rate(double p_succ, double e_phase, double e_bit,
                       double f_ec = kDefaultErrorCorrection);

/// Conservative filtered phase error: min(0.5, e_phase_obs / p_succ).
double analytic_phase_bound(double p_succ, double e_phase_obs);

/// Per-bin quantities of Eve's arrival-time optimization.
struct BinModel {
  std::vector<double> success;      ///< p(t)
  std::vector<double> bit_error;    ///< e_bit(t)
  std::vector<double> phase_error;  ///< unfiltered e_phase(t)

  void validate() const;
};

struct Bounds {
  bool feasible = false;
  double p_succ_min = 0.0;
  double e_phase_max = 0.0;   ///< clamped to 0.5
  std::vector<double> q_success;  ///< minimizer of the success probability
  std::vector<double> q_phase;    ///< maximizer of the filtered phase error
  int iterations = 0;
};

/// Over distributions q on the bins with sum q e_bit = e_bit_obs: the
/// minimum of sum q p, and the maximum of sum q e_phase / sum q p (solved as
/// a linear program after the Charnes-Cooper substitution).
Bounds solve_bounds(const BinModel& model, double e_bit_obs);

struct KeyRateInputs {
  DetectorPair pair;  ///< physical or logical curves
  double e_bit_obs = 0.03;
  double e_phase_obs = 0.03;
  double f_ec = kDefaultErrorCorrection;
  /// Predicted QBER per curve bin. Empty disables the per-bin error model and
  /// every bin is assumed to show e_bit_obs.
  std::vector<double> bin_bit_error;
};

/// Builds the bin model for `feasible_bins` and solves the bounds. The
/// unfiltered phase error of a bin scales with its bit error by
/// e_phase_obs / e_bit_obs.
Bounds optimize_bounds(const KeyRateInputs& inputs, std::span<const std::size_t> feasible_bins);

enum class EfficiencySource { Model, Measured };

struct KeyRateSettings {
  double e_bit_obs = 0.03;
  double e_phase_obs = 0.03;
  double f_ec = kDefaultErrorCorrection;
  double abort_threshold = kAbortThreshold;
  bool per_bin_error = false;
  EfficiencySource source = EfficiencySource::Model;
  std::uint64_t n_pulses = 1'000'000;  ///< per bin, measured source only
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct KeyRateReport {
  DemodulationMode mode = DemodulationMode::TwoState;
  double dt_ps = 0.0;
  bool feasible = false;
  double p_succ = 0.0;
  double e_phase = 0.0;
  double e_bit = 0.0;
  double rate = 0.0;
  std::vector<double> feasible_shifts;
  std::string method = "simplex";
  int iterations = 0;

  friend bool operator==(const KeyRateReport&, const KeyRateReport&) = default;
};

/// Full pipeline on one grid: predicted QBER per shift, feasible bins where it
/// stays under the abort threshold, efficiency per bin from the model or a
/// Monte Carlo sweep, then the bounds and the key rate.
KeyRateReport evaluate_key_rate(const DetectorPair& physical, const ReceiverConfig& receiver,
                                const KeyRateSettings& settings);

/// evaluate_key_rate after resampling the curves to each grid step.
std::pair<KeyRateReport, KeyRateReport> resolution_comparison(const DetectorPair& pair,
                                                              const ReceiverConfig& receiver,
                                                              double dt_fine_ps,
                                                              double dt_coarse_ps,
                                                              const KeyRateSettings& settings);

struct LossModel {
  double detector_efficiency = 0.2;
  double dark_prob_total = 2e-5;
  double e_optical = 0.03;
  double f_ec = kDefaultErrorCorrection;
};

/// Filtering bounds of one receiver mode at the optical operating point.
struct ModeBounds {
  double p_succ = 1.0;
  double e_phase = 0.03;
};

struct LossPoint {
  double loss_db = 0.0;
  double rate = 0.0;  ///< secret bits per photon sent
};

/// Rate per sent photon versus channel loss. Dark counts dilute the observed
/// error towards 1/2; the mode's phase error scales with it.
std::vector<LossPoint> rate_vs_loss(const ModeBounds& bounds, std::span<const double> loss_grid_db,
                                    const LossModel& model = {});

}  // namespace qkd
