#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace qkd {

/// Periodic, uniformly sampled detection efficiency of one gated APD.
///
/// Sample j holds the efficiency for a photon arriving at j * dt_ps within
/// the clock period. The curve is the diagonal of the detector's efficiency
/// operator in the arrival-time basis; off-diagonal terms are not modelled.
class GateEfficiencyCurve {
 public:
  GateEfficiencyCurve(std::vector<double> samples, double dt_ps, double period_ps,
                      double dark_prob);

  [[nodiscard]] std::span<const double> samples() const { return samples_; }
  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] double dt_ps() const { return dt_ps_; }
  [[nodiscard]] double period_ps() const { return period_ps_; }
  [[nodiscard]] double dark_prob() const { return dark_prob_; }
  [[nodiscard]] double operator[](std::size_t bin) const { return samples_[bin]; }

  /// Bin index of an arrival time; the time must lie on the grid (mod period).
  [[nodiscard]] std::size_t bin_at(double time_ps) const;
  /// Efficiency at a grid-aligned arrival time.
  [[nodiscard]] double at(double time_ps) const { return samples_[bin_at(time_ps)]; }

  friend bool operator==(const GateEfficiencyCurve&, const GateEfficiencyCurve&) = default;

 private:
  std::vector<double> samples_;
  double dt_ps_;
  double period_ps_;
  double dark_prob_;
};

struct DetectorPair {
  GateEfficiencyCurve apd0;
  GateEfficiencyCurve apd1;

  DetectorPair(GateEfficiencyCurve a0, GateEfficiencyCurve a1);

  [[nodiscard]] const GateEfficiencyCurve& operator[](int detector) const {
    return detector == 0 ? apd0 : apd1;
  }
  [[nodiscard]] double dt_ps() const { return apd0.dt_ps(); }
  [[nodiscard]] double period_ps() const { return apd0.period_ps(); }
  [[nodiscard]] std::size_t size() const { return apd0.size(); }

  friend bool operator==(const DetectorPair&, const DetectorPair&) = default;
};

enum class GateShapeKind { Gaussian, RaisedCosine };

struct GateShape {
  GateShapeKind kind = GateShapeKind::Gaussian;
  /// Raised-cosine only: fraction of the FWHM spent in the cosine edges.
  /// 1 gives a pure cos^2 pulse, 0 a rectangle.
  double rolloff = 1.0;
};

enum class DemodulationMode { TwoState, FourState };

/// Synthetic gate response. The peak sits on the bin containing center_ps and
/// the profile is symmetric about that bin on the periodic grid.
[[nodiscard]] GateEfficiencyCurve make_gate_curve(GateShape shape, double center_ps,
                                                  double fwhm_ps, double peak, double dt_ps,
                                                  double period_ps, double dark_prob);

/// Circular shift by delta_ps (must be a multiple of dt): out(t) = in(t - delta).
[[nodiscard]] GateEfficiencyCurve shift_curve(const GateEfficiencyCurve& curve, double delta_ps);

/// Curves seen by the logical register. Four-state demodulation averages the
/// two physical detectors bin by bin, so both logical curves are identical.
[[nodiscard]] DetectorPair logical_curves(const DetectorPair& pair, DemodulationMode mode);

/// Change the grid step. An integer multiple of dt decimates (keeps bins
/// 0, k, 2k, ...); an integer divisor interpolates linearly on the periodic
/// extension. Anything else is rejected.
[[nodiscard]] GateEfficiencyCurve resample(const GateEfficiencyCurve& curve, double dt_new_ps);
[[nodiscard]] DetectorPair resample(const DetectorPair& pair, double dt_new_ps);

/// Dark counts and period travel in a JSON sidecar next to the CSV
/// (same stem, .json extension).
[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Read `time_ps,eta0,eta1`. Dark probabilities come from the sidecar when it
/// exists, otherwise from the arguments.
[[nodiscard]] DetectorPair load_curves_csv(const std::filesystem::path& path, double dark0 = 0.0,
                                           double dark1 = 0.0);
void save_curves_csv(const DetectorPair& pair, const std::filesystem::path& path);

/// Integer ratio a/b when it is within tolerance of one, else 0.
[[nodiscard]] long integer_ratio(double a, double b);

}  // namespace qkd
