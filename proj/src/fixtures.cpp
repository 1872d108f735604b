#include "qkd/fixtures.hpp"

#include <fmt/format.h>

#include "qkd/error.hpp"

namespace qkd {

namespace {

constexpr double kArrivalPs = 495.0;

DetectorPair gate_pair(GateShape shape, double fwhm, double peak0, double peak1, double offset,
                       double dt_ps, double dark) {
  return DetectorPair{
      make_gate_curve(shape, kArrivalPs - offset / 2.0, fwhm, peak0, dt_ps, kDefaultPeriodPs, dark),
      make_gate_curve(shape, kArrivalPs + offset / 2.0, fwhm, peak1, dt_ps, kDefaultPeriodPs, dark)};
}

}  // namespace

DetectorPair severe_mismatch_fixture(double dt_ps) {
  return gate_pair({GateShapeKind::RaisedCosine, 0.3}, 700.0, 0.20, 0.12, 99.0, dt_ps, 1e-5);
}

DetectorPair matched_fixture(double dt_ps) {
  return gate_pair({GateShapeKind::RaisedCosine, 0.3}, 700.0, 0.20, 0.20, 0.0, dt_ps, 1e-5);
}

DetectorPair flat_fixture(double eta0, double eta1, double dt_ps, double dark_prob) {
  const long n = integer_ratio(kDefaultPeriodPs, dt_ps);
  if (n == 0) throw ValidationError(fmt::format("{} ps does not divide the period", dt_ps));
  const auto size = static_cast<std::size_t>(n);
  return DetectorPair{
      GateEfficiencyCurve(std::vector<double>(size, eta0), dt_ps, kDefaultPeriodPs, dark_prob),
      GateEfficiencyCurve(std::vector<double>(size, eta1), dt_ps, kDefaultPeriodPs, dark_prob)};
}

DetectorPair band_limited_fixture(double dt_ps) {
  return gate_pair({GateShapeKind::Gaussian, 1.0}, 400.0, 0.20, 0.16, 99.0, dt_ps, 1e-5);
}

std::vector<std::string> fixture_names() { return {"severe", "matched", "flat", "band-limited"}; }

DetectorPair fixture_by_name(const std::string& name, double dt_ps) {
  if (name == "severe") return severe_mismatch_fixture(dt_ps);
  if (name == "matched") return matched_fixture(dt_ps);
  if (name == "flat") return flat_fixture(0.2, 0.2, dt_ps);
  if (name == "band-limited") return band_limited_fixture(dt_ps);
  throw ValidationError(fmt::format("unknown fixture '{}'", name));
}

ReceiverConfig default_receiver(DemodulationMode mode) {
  ReceiverConfig receiver;
  receiver.mode = mode;
  receiver.waveform = calibrated_waveform(receiver.visibility);
  return receiver;
}

}  // namespace qkd
