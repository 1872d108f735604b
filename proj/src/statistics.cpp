#include "qkd/statistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "qkd/error.hpp"

namespace qkd {

double qber(const CountsSummary& summary) {
  if (summary.sifted == 0) throw UndefinedError("QBER undefined: no sifted events");
  return static_cast<double>(summary.errors) / static_cast<double>(summary.sifted);
}

double bias_contrast(double c0, double c1) {
  if (!(c0 + c1 > 0.0)) throw UndefinedError("bias undefined: C0 + C1 == 0");
  return (c0 - c1) / (c0 + c1);
}

double bias_contrast(const CountsSummary& summary) {
  return bias_contrast(static_cast<double>(summary.c0), static_cast<double>(summary.c1));
}

bool abort_check(double qber, double threshold) { return qber > threshold; }

double binomial_sigma(double count, std::optional<double> n) {
  if (count < 0.0) throw ValidationError("count must be non-negative");
  if (!n) return std::sqrt(count);
  if (!(*n > 0.0) || count > *n) throw ValidationError("binomial sigma needs 0 <= count <= n");
  return std::sqrt(count * (1.0 - count / *n));
}

double bias_sigma(double c0, double c1) {
  const double total = c0 + c1;
  if (!(total > 0.0)) throw UndefinedError("bias undefined: C0 + C1 == 0");
  return 2.0 * std::sqrt(c0 * c1 / (total * total * total));
}

double mutual_information_bits(const ShiftOutcome& label0, const ShiftOutcome& label1,
                               double p_label0) {
  const std::array<const ShiftOutcome*, 2> outcomes{&label0, &label1};
  const std::array<double, 2> weights{p_label0, 1.0 - p_label0};

  double total = 0.0;
  double accum = 0.0;
  for (int basis = 0; basis < 2; ++basis) {
    std::array<std::array<double, 2>, 2> joint{};  // [bit][label]
    for (int b = 0; b < 2; ++b) {
      for (int l = 0; l < 2; ++l) joint[b][l] = weights[l] * outcomes[l]->basis_bit[basis][b];
    }
    const std::array<double, 2> by_bit{joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]};
    const std::array<double, 2> by_label{joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]};
    const double basis_total = by_bit[0] + by_bit[1];
    total += basis_total;
    for (int b = 0; b < 2; ++b) {
      for (int l = 0; l < 2; ++l) {
        if (joint[b][l] <= 0.0) continue;
        accum += joint[b][l] * std::log2((joint[b][l] * basis_total) / (by_bit[b] * by_label[l]));
      }
    }
  }
  if (!(total > 0.0)) throw UndefinedError("Eve information undefined: zero sifted probability");
  return std::max(0.0, accum / total);
}

double eve_information(const DetectorPair& pair, const ReceiverConfig& receiver,
                       const EveStrategy& strategy) {
  strategy.validate();
  const DetectorPair analysed = logical_curves(pair, receiver.mode);
  const double t = strategy.channel_transmittance;
  const ShiftOutcome first = expected_outcome(analysed, receiver, strategy.shift_for(0), t);
  if (strategy.kind != EveKind::TwoPoint) {
    if (!(first.sifted > 0.0)) {
      throw UndefinedError("Eve information undefined: zero sifted probability");
    }
    return 0.0;
  }
  const ShiftOutcome second = expected_outcome(analysed, receiver, strategy.shift_for(1), t);
  return mutual_information_bits(first, second, strategy.p1);
}

double predicted_qber(const DetectorPair& pair, const ReceiverConfig& receiver,
                      const EveStrategy& strategy) {
  strategy.validate();
  const double t = strategy.channel_transmittance;
  const ShiftOutcome first = expected_outcome(pair, receiver, strategy.shift_for(0), t);
  if (strategy.kind != EveKind::TwoPoint) return first.qber();
  const ShiftOutcome second = expected_outcome(pair, receiver, strategy.shift_for(1), t);
  const double p = strategy.p1;
  const double sifted = p * first.sifted + (1.0 - p) * second.sifted;
  if (!(sifted > 0.0)) throw UndefinedError("QBER undefined: zero sifted probability");
  return (p * first.errors + (1.0 - p) * second.errors) / sifted;
}

}  // namespace qkd
