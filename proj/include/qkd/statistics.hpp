#pragma once

#include <optional>

#include "qkd/channel.hpp"
#include "qkd/counts.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

/// Asymptotic abort bound on the average QBER.
inline constexpr double kAbortThreshold = 0.11;

double qber(const CountsSummary& summary);

/// (C0 - C1) / (C0 + C1) over the logical detectors.
double bias_contrast(const CountsSummary& summary);
double bias_contrast(double c0, double c1);

/// True when the protocol must abort.
bool abort_check(double qber, double threshold = kAbortThreshold);

/// Square-root error on a count; with n given, the binomial form sqrt(k (1 - k/n)).
double binomial_sigma(double count, std::optional<double> n = std::nullopt);

/// Propagated uncertainty of bias_contrast: 2 sqrt(C0 C1 / (C0 + C1)^3).
double bias_sigma(double c0, double c1);

/// I(Bob's sifted bit ; Eve's shift label | public basis) in bits per sifted
/// pulse, given the per-label sifted outcome masses and label probabilities.
double mutual_information_bits(const ShiftOutcome& label0, const ShiftOutcome& label1, double p_label0);

/// Eve's information about the sifted key from an exact enumeration. In
/// four-state mode the receiver's logical detectors are identical, so the
/// calculation runs on the symmetrized pair.
double eve_information(const DetectorPair& pair, const ReceiverConfig& receiver,
                       const EveStrategy& strategy);

/// Average QBER over Eve's shift mixture, weighted by sifted rates.
double predicted_qber(const DetectorPair& pair, const ReceiverConfig& receiver,
                      const EveStrategy& strategy);

}  // namespace qkd
