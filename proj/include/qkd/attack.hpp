#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qkd/counts.hpp"
#include "qkd/detector_model.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

/// Shifts k * step_ps for all integers k with |k * step_ps| <= range_ps / 2.
std::vector<double> sweep_grid(double range_ps, double step_ps);

struct SweepPoint {
  double shift_ps = 0.0;
  CountsSummary counts;
};

/// One fixed-shift session per entry of `shifts`. Point i is seeded from
/// (seed, i) so the table does not depend on the number of threads.
std::vector<SweepPoint> sweep_characterization(const DetectorPair& pair,
                                               const ReceiverConfig& receiver,
                                               std::span<const double> shifts,
                                               std::uint64_t n_pulses_per_point, std::uint64_t seed,
                                               unsigned threads = 0);

struct AttackPlan {
  bool found = false;  ///< false when no strategy satisfies the QBER cap
  double t1_ps = 0.0;
  double t2_ps = 0.0;
  double p1 = 1.0;
  double eve_info_bits = 0.0;
  double predicted_qber = 0.0;
};

/// Coarse p1 grid searched by optimize_shift_pair (the equalizing value is
/// added per pair).
std::vector<double> default_p1_grid();

/// Exhaustive search over shift pairs from `grid` and p1 values for the
/// strategy with the largest Eve information whose predicted average QBER is
/// at most qber_cap. Ties go to the smallest (t1, t2, p1).
AttackPlan optimize_shift_pair(const DetectorPair& pair, const ReceiverConfig& receiver,
                               double qber_cap, std::span<const double> grid,
                               double transmittance = 1.0);

}  // namespace qkd
