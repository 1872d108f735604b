#include "qkd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace qkd::oracle {

ClickProbabilities enumerate_clicks(double phi_a, double phi_b_eff, double visibility, double eta0,
                                    double eta1, double dark0, double dark1) {
  const double r0 = 0.5 * (1.0 + visibility * std::cos(phi_a + phi_b_eff));
  const double route[2] = {r0, 1.0 - r0};
  const double eta[2] = {eta0, eta1};
  ClickProbabilities out;
  for (int path = 0; path < 2; ++path) {
    for (int seen = 0; seen < 2; ++seen) {
      const double p_seen = seen ? eta[path] : 1.0 - eta[path];
      for (int d0 = 0; d0 < 2; ++d0) {
        for (int d1 = 0; d1 < 2; ++d1) {
          const double p = route[path] * p_seen * (d0 ? dark0 : 1.0 - dark0) *
                           (d1 ? dark1 : 1.0 - dark1);
          const bool fire0 = d0 || (seen && path == 0);
          const bool fire1 = d1 || (seen && path == 1);
          if (fire0 && fire1) out.both += p;
          else if (fire0) out.det0 += p;
          else if (fire1) out.det1 += p;
          else out.none += p;
        }
      }
    }
  }
  return out;
}

ShiftOutcome enumerate_outcome(const DetectorPair& pair, const ReceiverConfig& receiver,
                               double shift_ps) {
  const std::size_t bin = pair.apd0.bin_at(receiver.arrival_ps + shift_ps);
  const double eta0 = pair.apd0[bin];
  const double eta1 = pair.apd1[bin];
  const bool four = receiver.mode == DemodulationMode::FourState;
  const int bob_settings = four ? 4 : 2;
  ShiftOutcome out;
  for (int qa = 0; qa < 4; ++qa) {
    const AliceChoice alice = AliceChoice::from_quarter_turns(qa);
    for (int qb = 0; qb < bob_settings; ++qb) {
      const BobChoice bob = BobChoice::from_quarter_turns(receiver.mode, qb);
      const double weight = 0.25 / bob_settings;
      const ClickProbabilities c =
          enumerate_clicks(alice.phase(), effective_phase(bob, receiver.waveform, shift_ps),
                           receiver.visibility, eta0, eta1, pair.apd0.dark_prob(),
                           pair.apd1.dark_prob());
      const std::pair<Click, double> leaves[] = {{Click::Det0, c.det0 + 0.5 * c.both},
                                                 {Click::Det1, c.det1 + 0.5 * c.both}};
      for (const auto& [click, p] : leaves) {
        const SiftResult s = sift(alice, bob, click);
        if (!s.sifted) continue;
        const double mass = weight * p;
        const int logical = logical_detector(click == Click::Det0 ? 0 : 1, bob);
        out.sifted += mass;
        out.logical[logical] += mass;
        out.basis_bit[alice.basis == Basis::X ? 1 : 0][*s.logical_bit] += mass;
        if (*s.error) out.errors += mass;
      }
    }
  }
  return out;
}

VertexBounds vertex_enumeration(const BinModel& model, double e_bit_obs) {
  const std::size_t n = model.success.size();
  const double tol = 1e-12;
  VertexBounds out;
  out.p_succ_min = std::numeric_limits<double>::infinity();
  auto visit = [&](const std::vector<std::pair<std::size_t, double>>& q) {
    double p = 0.0;
    double ph = 0.0;
    for (const auto& [t, w] : q) {
      p += w * model.success[t];
      ph += w * model.phase_error[t];
    }
    out.feasible = true;
    out.p_succ_min = std::min(out.p_succ_min, p);
    out.e_phase_max = std::max(out.e_phase_max, ph / p);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double di = model.bit_error[i] - e_bit_obs;
    if (std::abs(di) <= tol) visit({{i, 1.0}});
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dj = model.bit_error[j] - e_bit_obs;
      if (di * dj >= 0.0) continue;
      const double wi = dj / (dj - di);
      visit({{i, wi}, {j, 1.0 - wi}});
    }
  }
  if (!out.feasible) return VertexBounds{};
  out.e_phase_max = std::min(0.5, out.e_phase_max);
  return out;
}

double plugin_mutual_information(std::span<const PulseRecord> records, const EveStrategy& strategy) {
  // counts[basis][bit][label]
  double counts[2][2][2] = {};
  double total = 0.0;
  for (const PulseRecord& r : records) {
    if (!r.sifted) continue;
    const int label = r.eve_shift_ps == strategy.t1_ps ? 0 : 1;
    counts[r.alice.basis == Basis::X][*r.logical_bit][label] += 1.0;
    total += 1.0;
  }
  double mi = 0.0;
  for (auto& basis : counts) {
    double nb = 0.0;
    double bit[2] = {};
    double label[2] = {};
    for (int b = 0; b < 2; ++b) {
      for (int l = 0; l < 2; ++l) {
        nb += basis[b][l];
        bit[b] += basis[b][l];
        label[l] += basis[b][l];
      }
    }
    for (int b = 0; b < 2; ++b) {
      for (int l = 0; l < 2; ++l) {
        if (basis[b][l] == 0.0) continue;
        mi += basis[b][l] / total * std::log2(basis[b][l] * nb / (bit[b] * label[l]));
      }
    }
  }
  return mi;
}

double bootstrap_bias_sigma(std::uint64_t c0, std::uint64_t c1, int replicates,
                            std::uint64_t seed) {
  const std::uint64_t total = c0 + c1;
  std::mt19937_64 rng(seed);
  std::binomial_distribution<std::uint64_t> draw(total, static_cast<double>(c0) / total);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < replicates; ++i) {
    const double k = static_cast<double>(draw(rng));
    const double bias = (2.0 * k - static_cast<double>(total)) / static_cast<double>(total);
    sum += bias;
    sum_sq += bias * bias;
  }
  const double mean = sum / replicates;
  return std::sqrt(sum_sq / replicates - mean * mean);
}

double binary_entropy_precise(double x) {
  using boost::multiprecision::cpp_dec_float_50;
  if (x == 0.0 || x == 1.0) return 0.0;
  const cpp_dec_float_50 p(x);
  const cpp_dec_float_50 q = 1 - p;
  const cpp_dec_float_50 ln2 = boost::multiprecision::log(cpp_dec_float_50(2));
  const cpp_dec_float_50 h = -(p * log(p) + q * log(q)) / ln2;
  return h.convert_to<double>();
}

DetectorPair random_pair(Rng& rng, std::size_t bins, double dt_ps, double lo, double hi,
                         double dark) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> a(bins);
  std::vector<double> b(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
  }
  const double period = dt_ps * static_cast<double>(bins);
  return DetectorPair{GateEfficiencyCurve(a, dt_ps, period, dark),
                      GateEfficiencyCurve(b, dt_ps, period, dark)};
}

}  // namespace qkd::oracle

namespace qkd::oracle {

RandomLpInstance random_lp_instance(Rng& rng, std::size_t bins) {
  std::uniform_real_distribution<double> success(0.05, 1.0);
  std::uniform_real_distribution<double> error(0.0, 0.2);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  RandomLpInstance inst;
  for (std::size_t i = 0; i < bins; ++i) {
    const double e = error(rng);
    inst.model.success.push_back(i == 0 && bins > 1 ? 1.0 : success(rng));
    inst.model.bit_error.push_back(e);
    inst.model.phase_error.push_back(std::min(0.5, e * scale(rng)));
  }
  const auto [lo, hi] =
      std::minmax_element(inst.model.bit_error.begin(), inst.model.bit_error.end());
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  if (pick(rng) < 0.1) {
    inst.e_bit_obs = *hi + 0.01;
  } else {
    inst.e_bit_obs = *lo + pick(rng) * (*hi - *lo);
  }
  return inst;
}

}  // namespace qkd::oracle
