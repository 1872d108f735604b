#pragma once

#include "qkd/rng.hpp"

namespace qkd {

enum class EveKind { None, FixedShift, TwoPoint };

/// Eve's time-shift strategy: which arrival delays she imposes, and the loss
/// of the channel she controls.
struct EveStrategy {
  EveKind kind = EveKind::None;
  double t1_ps = 0.0;  ///< fixed shift, or first shift of a two-point attack
  double t2_ps = 0.0;
  double p1 = 1.0;     ///< probability of choosing t1
  double channel_transmittance = 1.0;

  static EveStrategy none(double transmittance = 1.0) {
    return {EveKind::None, 0.0, 0.0, 1.0, transmittance};
  }
  static EveStrategy fixed(double shift_ps, double transmittance = 1.0) {
    return {EveKind::FixedShift, shift_ps, shift_ps, 1.0, transmittance};
  }
  static EveStrategy two_point(double t1_ps, double t2_ps, double p1, double transmittance = 1.0) {
    return {EveKind::TwoPoint, t1_ps, t2_ps, p1, transmittance};
  }

  /// Throws ValidationError on p1 or transmittance out of range.
  void validate() const;

  /// Shift applied for label 0 (t1) or 1 (t2).
  [[nodiscard]] double shift_for(int label) const {
    if (kind == EveKind::None) return 0.0;
    return label == 0 ? t1_ps : t2_ps;
  }
  /// Probability of label 0.
  [[nodiscard]] double label0_probability() const { return kind == EveKind::TwoPoint ? p1 : 1.0; }
};

struct ChannelOutcome {
  double shift_ps = 0.0;
  int label = 0;
  bool transmitted = true;
};

/// Per-pulse action of Eve's switch and delay lines plus channel loss.
/// Eve changes only the arrival time, never the encoded phase.
ChannelOutcome apply_channel(const EveStrategy& strategy, Rng& rng);

}  // namespace qkd
