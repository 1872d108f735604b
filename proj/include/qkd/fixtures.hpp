#pragma once

#include <string>
#include <vector>

#include "qkd/detector_model.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

inline constexpr double kDefaultPeriodPs = 990.0;
inline constexpr double kFineStepPs = 4.5;
inline constexpr double kCoarseStepPs = 49.5;

/// Raised-cosine gates (700 ps FWHM) of different heights, offset by 99 ps
/// around the nominal arrival. Bias contrast reaches about 0.3 inside the
/// low-QBER window.
DetectorPair severe_mismatch_fixture(double dt_ps = kFineStepPs);

/// Identical gates on both detectors.
DetectorPair matched_fixture(double dt_ps = kFineStepPs);

/// Time-independent efficiencies; used where every shift must see the same
/// count rate.
DetectorPair flat_fixture(double eta0 = 0.2, double eta1 = 0.2, double dt_ps = kFineStepPs,
                          double dark_prob = 0.0);

/// Smooth Gaussian gates with a moderate timing offset.
DetectorPair band_limited_fixture(double dt_ps = kFineStepPs);

/// Fixture by name: severe, matched, flat, band-limited.
DetectorPair fixture_by_name(const std::string& name, double dt_ps = kFineStepPs);
std::vector<std::string> fixture_names();

/// Receiver with the calibrated droop waveform.
ReceiverConfig default_receiver(DemodulationMode mode = DemodulationMode::TwoState);

}  // namespace qkd
