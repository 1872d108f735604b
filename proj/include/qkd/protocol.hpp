#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "qkd/channel.hpp"
#include "qkd/counts.hpp"
#include "qkd/detector_model.hpp"
#include "qkd/rng.hpp"

namespace qkd {

enum class Basis { Z, X };

/// Interference convention: phases summing to 0 (mod 2pi) route the photon to
/// this detector, phases summing to pi to the other one.
inline constexpr int kConstructiveDetector = 0;

/// Alice's BB84 state. Phases are held as quarter turns:
/// Z0 -> 0, X0 -> pi/2, Z1 -> pi, X1 -> 3pi/2.
struct AliceChoice {
  int bit = 0;
  Basis basis = Basis::Z;

  [[nodiscard]] int quarter_turns() const { return 2 * bit + (basis == Basis::X ? 1 : 0); }
  [[nodiscard]] double phase() const;
  static AliceChoice from_quarter_turns(int quarter);

  friend bool operator==(const AliceChoice&, const AliceChoice&) = default;
};

/// Bob's demodulation setting. Two-state uses {0, pi/2} with flip 0; four-state
/// uses all four phases and records flip = 1 for {pi, 3pi/2}.
struct BobChoice {
  DemodulationMode mode = DemodulationMode::TwoState;
  Basis basis = Basis::Z;
  int flip = 0;
  int quarter = 0;

  [[nodiscard]] double phase() const;
  static BobChoice from_quarter_turns(DemodulationMode mode, int quarter);

  friend bool operator==(const BobChoice&, const BobChoice&) = default;
};

enum class WaveformShape { IdealSquare, RaisedCosineEdges };

/// Normalized drive amplitude of Bob's phase modulator versus pulse offset.
///
/// The drive is bipolar: +1 on a plateau around zero offset, -1 around half
/// a period, joined by raised-cosine edges of width rise_fall_ps (an ideal
/// square wave switches instantly at the plateau edge).
struct DriveWaveform {
  WaveformShape shape = WaveformShape::RaisedCosineEdges;
  double plateau_ps = 0.0;
  double rise_fall_ps = 0.0;
  double period_ps = 990.0;

  void validate() const;
  [[nodiscard]] double amplitude(double offset_ps) const;
};

struct ReceiverConfig {
  DemodulationMode mode = DemodulationMode::TwoState;
  double visibility = 0.94;
  DriveWaveform waveform;
  int deadtime_cycles = 0;
  /// Position of an unshifted pulse inside the detector gate period.
  double arrival_ps = 495.0;

  void validate() const;
};

enum class Click { None, Det0, Det1, Both };

struct ClickProbabilities {
  double det0 = 0.0;  ///< only detector 0 fires
  double det1 = 0.0;  ///< only detector 1 fires
  double both = 0.0;
  double none = 0.0;
};

struct SiftResult {
  bool sifted = false;
  std::optional<int> logical_bit;
  std::optional<bool> error;
};

struct PulseRecord {
  AliceChoice alice;
  double eve_shift_ps = 0.0;
  bool transmitted = true;
  BobChoice bob;
  Click click = Click::None;
  bool sifted = false;
  std::optional<int> logical_bit;
  std::optional<bool> error;
};

using RecordSink = std::function<void(const PulseRecord&)>;

AliceChoice choose_alice(Rng& rng);
BobChoice choose_bob(DemodulationMode mode, Rng& rng);

/// Bob's applied phase for a pulse arriving shift_ps away from the modulator's
/// optimum: phase_b * v(shift_ps).
double effective_phase(const BobChoice& bob, const DriveWaveform& waveform, double shift_ps);

/// Single-photon detection model. The photon reaches detector 0 with
/// probability r0 = (1 + V cos(phi_a + phi_b_eff)) / 2 and detector 1 with
/// r1 = 1 - r0, and clicks with that detector's efficiency. Dark counts fire
/// independently in each detector.
ClickProbabilities click_probabilities(double phi_a, double phi_b_eff, double visibility,
                                       double eta0, double eta1, double dark0, double dark1);

/// Logical detector after undoing Bob's flip.
inline int logical_detector(int physical_detector, const BobChoice& bob) {
  return physical_detector ^ bob.flip;
}

/// Key bit carried by a logical detector in the given basis. With the sum
/// convention and Bob's X phase of pi/2, X-basis bit 0 lands on detector 1.
inline int bit_from_logical_detector(int logical, Basis basis) {
  return logical ^ (basis == Basis::X ? 1 : 0);
}

/// Sift one pulse. `click` must already have double clicks arbitrated; a
/// Both or None click is never sifted.
SiftResult sift(const AliceChoice& alice, const BobChoice& bob, Click click);

/// Per-pulse probabilities of sifted outcomes at one arrival shift, from exact
/// enumeration over Alice's and Bob's choices and click outcomes.
struct ShiftOutcome {
  double sifted = 0.0;
  double errors = 0.0;
  std::array<double, 2> logical{};                 ///< by logical detector
  std::array<std::array<double, 2>, 2> basis_bit{};  ///< [basis][logical bit]

  [[nodiscard]] double qber() const;
  [[nodiscard]] double bias() const;
};

ShiftOutcome expected_outcome(const DetectorPair& pair, const ReceiverConfig& receiver,
                              double shift_ps, double transmittance = 1.0);

/// Simulate n_pulses end to end. Records are produced only when `sink` is set.
CountsSummary run_session(const DetectorPair& pair, const ReceiverConfig& receiver,
                          const EveStrategy& eve, std::uint64_t n_pulses, Rng& rng,
                          const RecordSink& sink = {});

/// One JSON object per line.
std::string to_jsonl(const PulseRecord& record);

/// Plateau width for which the two-state QBER at |offset| = edge_ps equals
/// target_qber, found by bisection (rise/fall time held fixed).
double calibrate_plateau(double visibility, double rise_fall_ps, double period_ps,
                         double edge_ps = 250.0, double target_qber = 0.11);

/// Raised-cosine drive calibrated with calibrate_plateau.
DriveWaveform calibrated_waveform(double visibility = 0.94, double rise_fall_ps = 200.0,
                                  double period_ps = 990.0, double edge_ps = 250.0,
                                  double target_qber = 0.11);

std::string to_string(DemodulationMode mode);
DemodulationMode parse_mode(const std::string& text);

}  // namespace qkd
