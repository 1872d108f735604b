#include "qkd/attack.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "qkd/channel.hpp"
#include "qkd/error.hpp"
#include "qkd/rng.hpp"
#include "qkd/statistics.hpp"

namespace qkd {

namespace {

// Improvements smaller than this are treated as ties so rounding noise cannot
// override the ordering rule.
constexpr double kTieTolerance = 1e-12;

}  // namespace

std::vector<double> sweep_grid(double range_ps, double step_ps) {
  if (!(range_ps >= 0.0) || !(step_ps > 0.0)) {
    throw ValidationError("sweep grid needs range >= 0 and step > 0");
  }
  const auto k_max = static_cast<long>(std::floor(range_ps / 2.0 / step_ps + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(2 * k_max + 1));
  for (long k = -k_max; k <= k_max; ++k) grid.push_back(static_cast<double>(k) * step_ps);
  return grid;
}

std::vector<SweepPoint> sweep_characterization(const DetectorPair& pair,
                                               const ReceiverConfig& receiver,
                                               std::span<const double> shifts,
                                               std::uint64_t n_pulses_per_point, std::uint64_t seed,
                                               unsigned threads) {
  receiver.validate();
  for (double s : shifts) static_cast<void>(pair.apd0.bin_at(receiver.arrival_ps + s));

  std::vector<SweepPoint> table(shifts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < shifts.size(); i = next++) {
      Rng rng = derived_rng(seed, i);
      table[i].shift_ps = shifts[i];
      table[i].counts =
          run_session(pair, receiver, EveStrategy::fixed(shifts[i]), n_pulses_per_point, rng);
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, shifts.size())));
  if (threads == 1) {
    worker();
    return table;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return table;
}

std::vector<double> default_p1_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  return grid;
}

AttackPlan optimize_shift_pair(const DetectorPair& pair, const ReceiverConfig& receiver,
                               double qber_cap, std::span<const double> grid,
                               double transmittance) {
  if (!(qber_cap > 0.0 && qber_cap < 0.5)) throw ValidationError("qber_cap must lie in (0, 0.5)");
  if (grid.empty()) throw ValidationError("shift grid is empty");
  receiver.validate();

  std::vector<double> shifts(grid.begin(), grid.end());
  std::sort(shifts.begin(), shifts.end());
  shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());

  const DetectorPair analysed = logical_curves(pair, receiver.mode);
  std::vector<ShiftOutcome> physical;
  std::vector<ShiftOutcome> logical;
  physical.reserve(shifts.size());
  logical.reserve(shifts.size());
  for (double s : shifts) {
    physical.push_back(expected_outcome(pair, receiver, s, transmittance));
    logical.push_back(expected_outcome(analysed, receiver, s, transmittance));
  }

  AttackPlan best;
  double best_info = -1.0;
  auto consider = [&](std::size_t i, std::size_t j, double p1) {
    const ShiftOutcome& a = physical[i];
    const ShiftOutcome& b = physical[j];
    const double sifted = p1 * a.sifted + (1.0 - p1) * b.sifted;
    if (!(sifted > 0.0)) return;
    const double q = (p1 * a.errors + (1.0 - p1) * b.errors) / sifted;
    if (q > qber_cap) return;
    const double info = i == j ? 0.0 : mutual_information_bits(logical[i], logical[j], p1);
    if (info > best_info + kTieTolerance) {
      best_info = info;
      best = AttackPlan{true, shifts[i], shifts[j], p1, info, q};
    }
  };

  const std::vector<double> p1_grid = default_p1_grid();
  std::vector<double> p1_values;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    consider(i, i, 1.0);
    for (std::size_t j = i + 1; j < shifts.size(); ++j) {
      p1_values = p1_grid;
      const double total = physical[i].sifted + physical[j].sifted;
      if (total > 0.0) p1_values.push_back(physical[j].sifted / total);
      std::sort(p1_values.begin(), p1_values.end());
      for (double p1 : p1_values) consider(i, j, p1);
    }
  }
  return best;
}

}  // namespace qkd
