#include "qkd/protocol.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qkd/error.hpp"

namespace qkd {

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 2.0;

// cos(alice_quarter * pi/2 + theta) without forming the sum, so that flipping
// Alice's bit (quarter + 2) negates the result exactly.
double interference_cosine(int alice_quarter, double theta) {
  switch (alice_quarter & 3) {
    case 0: return std::cos(theta);
    case 1: return -std::sin(theta);
    case 2: return -std::cos(theta);
    default: return std::sin(theta);
  }
}

ClickProbabilities clicks_from_cosine(double cosine, double visibility, double eta0, double eta1,
                                      double dark0, double dark1) {
  const double r0 = 0.5 * (1.0 + visibility * cosine);
  const double r1 = 0.5 * (1.0 - visibility * cosine);
  const double a0 = r0 * eta0;
  const double a1 = r1 * eta1;
  const double lost = 1.0 - (a0 + a1);
  ClickProbabilities p;
  p.det0 = a0 * (1.0 - dark1) + lost * dark0 * (1.0 - dark1);
  p.det1 = a1 * (1.0 - dark0) + lost * dark1 * (1.0 - dark0);
  p.both = (a0 * dark1 + a1 * dark0) + lost * dark0 * dark1;
  p.none = lost * (1.0 - dark0) * (1.0 - dark1);
  return p;
}

void require_unit(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(fmt::format("{} = {} outside [0, 1]", name, value));
  }
}

int bob_quarter_count(DemodulationMode mode) { return mode == DemodulationMode::TwoState ? 2 : 4; }

// QBER of a receiver with unit efficiencies and no dark counts when the drive
// amplitude is v.
double qber_at_amplitude(DemodulationMode mode, double visibility, double v) {
  double sifted = 0.0;
  double errors = 0.0;
  for (int qb = 0; qb < bob_quarter_count(mode); ++qb) {
    const BobChoice bob = BobChoice::from_quarter_turns(mode, qb);
    const double theta = qb * kQuarterTurn * v;
    for (int bit = 0; bit < 2; ++bit) {
      const AliceChoice alice{bit, bob.basis};
      const auto p =
          clicks_from_cosine(interference_cosine(alice.quarter_turns(), theta), visibility, 1, 1, 0, 0);
      for (int d = 0; d < 2; ++d) {
        const double mass = (d == 0 ? p.det0 : p.det1) + 0.5 * p.both;
        const int b = bit_from_logical_detector(logical_detector(d, bob), bob.basis);
        sifted += mass;
        if (b != bit) errors += mass;
      }
    }
  }
  return errors / sifted;
}

const char* basis_name(Basis b) { return b == Basis::Z ? "Z" : "X"; }

const char* click_name(Click c) {
  switch (c) {
    case Click::None: return "none";
    case Click::Det0: return "det0";
    case Click::Det1: return "det1";
    default: return "both";
  }
}

}  // namespace

double AliceChoice::phase() const { return quarter_turns() * kQuarterTurn; }

AliceChoice AliceChoice::from_quarter_turns(int quarter) {
  if (quarter < 0 || quarter > 3) throw ValidationError("Alice phase index outside 0..3");
  return {quarter / 2, (quarter & 1) ? Basis::X : Basis::Z};
}

double BobChoice::phase() const { return quarter * kQuarterTurn; }

BobChoice BobChoice::from_quarter_turns(DemodulationMode mode, int quarter) {
  if (quarter < 0 || quarter >= bob_quarter_count(mode)) {
    throw ValidationError(fmt::format("Bob phase index {} invalid for {}", quarter, to_string(mode)));
  }
  return {mode, (quarter & 1) ? Basis::X : Basis::Z, quarter >= 2 ? 1 : 0, quarter};
}

void DriveWaveform::validate() const {
  if (!(period_ps > 0.0)) throw ValidationError("drive period must be positive");
  if (!(plateau_ps >= 0.0) || !(rise_fall_ps >= 0.0)) {
    throw ValidationError("drive plateau and rise/fall time must be non-negative");
  }
  if (0.5 * plateau_ps + rise_fall_ps > 0.5 * period_ps + 1e-9) {
    throw ValidationError(fmt::format("plateau {} ps + edge {} ps exceed half of the {} ps period",
                                      plateau_ps, rise_fall_ps, period_ps));
  }
}

double DriveWaveform::amplitude(double offset_ps) const {
  const double d = std::abs(std::remainder(offset_ps, period_ps));
  const double half = 0.5 * plateau_ps;
  if (d <= half) return 1.0;
  if (shape == WaveformShape::IdealSquare || rise_fall_ps == 0.0) return -1.0;
  if (d >= half + rise_fall_ps) return -1.0;
  return std::cos(std::numbers::pi * (d - half) / rise_fall_ps);
}

void ReceiverConfig::validate() const {
  require_unit(visibility, "visibility");
  if (deadtime_cycles < 0) throw ValidationError("deadtime must be non-negative");
  waveform.validate();
}

AliceChoice choose_alice(Rng& rng) {
  return AliceChoice::from_quarter_turns(static_cast<int>(rng() >> 62));
}

BobChoice choose_bob(DemodulationMode mode, Rng& rng) {
  const int quarter = static_cast<int>(mode == DemodulationMode::TwoState ? rng() >> 63 : rng() >> 62);
  return BobChoice::from_quarter_turns(mode, quarter);
}

double effective_phase(const BobChoice& bob, const DriveWaveform& waveform, double shift_ps) {
  return bob.phase() * waveform.amplitude(shift_ps);
}

ClickProbabilities click_probabilities(double phi_a, double phi_b_eff, double visibility,
                                       double eta0, double eta1, double dark0, double dark1) {
  require_unit(visibility, "visibility");
  require_unit(eta0, "eta0");
  require_unit(eta1, "eta1");
  require_unit(dark0, "dark0");
  require_unit(dark1, "dark1");
  return clicks_from_cosine(std::cos(phi_a + phi_b_eff), visibility, eta0, eta1, dark0, dark1);
}

SiftResult sift(const AliceChoice& alice, const BobChoice& bob, Click click) {
  if (alice.basis != bob.basis || (click != Click::Det0 && click != Click::Det1)) return {};
  const int physical = click == Click::Det0 ? 0 : 1;
  const int bit = bit_from_logical_detector(logical_detector(physical, bob), bob.basis);
  return {true, bit, bit != alice.bit};
}

double ShiftOutcome::qber() const {
  if (!(sifted > 0.0)) throw UndefinedError("QBER undefined: zero sifted probability");
  return errors / sifted;
}

double ShiftOutcome::bias() const {
  const double total = logical[0] + logical[1];
  if (!(total > 0.0)) throw UndefinedError("bias undefined: zero sifted probability");
  return (logical[0] - logical[1]) / total;
}

ShiftOutcome expected_outcome(const DetectorPair& pair, const ReceiverConfig& receiver,
                              double shift_ps, double transmittance) {
  const double arrival = receiver.arrival_ps + shift_ps;
  const double eta0 = transmittance * pair.apd0.at(arrival);
  const double eta1 = transmittance * pair.apd1.at(arrival);
  const double dark0 = pair.apd0.dark_prob();
  const double dark1 = pair.apd1.dark_prob();
  const double v = receiver.waveform.amplitude(shift_ps);
  const int bob_states = bob_quarter_count(receiver.mode);
  const double weight = 1.0 / (4.0 * bob_states);

  ShiftOutcome out;
  for (int qb = 0; qb < bob_states; ++qb) {
    const BobChoice bob = BobChoice::from_quarter_turns(receiver.mode, qb);
    const double theta = qb * kQuarterTurn * v;
    const int x = bob.basis == Basis::X ? 1 : 0;
    // mass[a][b]: Alice bit a, Bob's sifted bit b.
    std::array<std::array<double, 2>, 2> mass{};
    for (int a = 0; a < 2; ++a) {
      const AliceChoice alice{a, bob.basis};
      const auto p = clicks_from_cosine(interference_cosine(alice.quarter_turns(), theta),
                                        receiver.visibility, eta0, eta1, dark0, dark1);
      for (int b = 0; b < 2; ++b) {
        const int physical = b ^ x ^ bob.flip;
        mass[a][b] = (physical == 0 ? p.det0 : p.det1) + 0.5 * p.both;
      }
    }
    // Summing Alice's two bits pairwise keeps the two key-bit totals bitwise
    // equal whenever the detectors are identical.
    for (int b = 0; b < 2; ++b) {
      const double m = weight * (mass[0][b] + mass[1][b]);
      out.basis_bit[x][b] += m;
      out.logical[b ^ x] += m;
    }
    out.errors += weight * (mass[0][1] + mass[1][0]);
  }
  out.sifted = (out.basis_bit[0][0] + out.basis_bit[0][1]) + (out.basis_bit[1][0] + out.basis_bit[1][1]);
  return out;
}

CountsSummary run_session(const DetectorPair& pair, const ReceiverConfig& receiver,
                          const EveStrategy& eve, std::uint64_t n_pulses, Rng& rng,
                          const RecordSink& sink) {
  if (n_pulses < 1) throw ValidationError("a session needs at least one pulse");
  receiver.validate();
  eve.validate();

  // Cumulative outcome thresholds per [label][transmitted][alice][bob].
  struct Thresholds {
    double det0, det1, both;
  };
  std::array<std::array<std::array<std::array<Thresholds, 4>, 4>, 2>, 2> table{};
  const int bob_states = bob_quarter_count(receiver.mode);
  const int labels = eve.kind == EveKind::TwoPoint ? 2 : 1;
  for (int label = 0; label < labels; ++label) {
    const double shift = eve.shift_for(label);
    const double arrival = receiver.arrival_ps + shift;
    const double v = receiver.waveform.amplitude(shift);
    for (int tx = 0; tx < 2; ++tx) {
      const double eta0 = tx ? pair.apd0.at(arrival) : 0.0;
      const double eta1 = tx ? pair.apd1.at(arrival) : 0.0;
      for (int qa = 0; qa < 4; ++qa) {
        for (int qb = 0; qb < bob_states; ++qb) {
          const auto p = clicks_from_cosine(interference_cosine(qa, qb * kQuarterTurn * v),
                                            receiver.visibility, eta0, eta1,
                                            pair.apd0.dark_prob(), pair.apd1.dark_prob());
          table[label][tx][qa][qb] = {p.det0, p.det0 + p.det1, p.det0 + p.det1 + p.both};
        }
      }
    }
  }

  CountsSummary counts;
  counts.n_pulses = n_pulses;
  const auto deadtime = static_cast<std::uint64_t>(receiver.deadtime_cycles);
  std::array<std::uint64_t, 2> last_fire{};
  std::array<bool, 2> ever_fired{};
  for (std::uint64_t i = 0; i < n_pulses; ++i) {
    const AliceChoice alice = choose_alice(rng);
    const ChannelOutcome channel = apply_channel(eve, rng);
    const BobChoice bob = choose_bob(receiver.mode, rng);
    const auto& t = table[channel.label][channel.transmitted ? 1 : 0][alice.quarter_turns()][bob.quarter];
    const double u = uniform01(rng);
    bool fire0 = u < t.det0 || (u >= t.det1 && u < t.both);
    bool fire1 = (u >= t.det0 && u < t.det1) || (u >= t.det1 && u < t.both);
    if (deadtime > 0) {
      for (int d = 0; d < 2; ++d) {
        bool& fire = d == 0 ? fire0 : fire1;
        if (fire && ever_fired[d] && i - last_fire[d] <= deadtime) {
          fire = false;
        } else if (fire) {
          last_fire[d] = i;
          ever_fired[d] = true;
        }
      }
    }
    Click click = fire0 ? (fire1 ? Click::Both : Click::Det0) : (fire1 ? Click::Det1 : Click::None);
    Click resolved = click;
    if (click == Click::Both) resolved = (rng() >> 63) ? Click::Det1 : Click::Det0;

    const SiftResult s = sift(alice, bob, resolved);
    if (s.sifted) {
      ++counts.sifted;
      const int logical = logical_detector(resolved == Click::Det0 ? 0 : 1, bob);
      ++(logical == 0 ? counts.c0 : counts.c1);
      if (*s.error) ++counts.errors;
    }
    if (sink) {
      sink(PulseRecord{alice, channel.shift_ps, channel.transmitted, bob, click, s.sifted,
                       s.logical_bit, s.error});
    }
  }
  return counts;
}

std::string to_jsonl(const PulseRecord& r) {
  nlohmann::json j = {
      {"alice", {{"bit", r.alice.bit}, {"basis", basis_name(r.alice.basis)}}},
      {"shift_ps", r.eve_shift_ps},
      {"transmitted", r.transmitted},
      {"bob", {{"basis", basis_name(r.bob.basis)}, {"flip", r.bob.flip}, {"phase_index", r.bob.quarter}}},
      {"click", click_name(r.click)},
      {"sifted", r.sifted},
  };
  j["logical_bit"] = r.logical_bit ? nlohmann::json(*r.logical_bit) : nlohmann::json(nullptr);
  j["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr);
  return j.dump();
}

double calibrate_plateau(double visibility, double rise_fall_ps, double period_ps, double edge_ps,
                         double target_qber) {
  const auto qber_for = [&](double plateau) {
    const DriveWaveform w{WaveformShape::RaisedCosineEdges, plateau, rise_fall_ps, period_ps};
    return qber_at_amplitude(DemodulationMode::TwoState, visibility, w.amplitude(edge_ps));
  };
  double lo = std::max(0.0, 2.0 * (edge_ps - rise_fall_ps));  // v(edge) = -1
  double hi = 2.0 * edge_ps;                                  // v(edge) = +1
  if (!(qber_for(hi) <= target_qber && target_qber <= qber_for(lo))) {
    throw ValidationError(fmt::format("QBER {} at {} ps is unreachable with {} ps edges",
                                      target_qber, edge_ps, rise_fall_ps));
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (qber_for(mid) > target_qber ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DriveWaveform calibrated_waveform(double visibility, double rise_fall_ps, double period_ps,
                                  double edge_ps, double target_qber) {
  DriveWaveform w{WaveformShape::RaisedCosineEdges,
                  calibrate_plateau(visibility, rise_fall_ps, period_ps, edge_ps, target_qber),
                  rise_fall_ps, period_ps};
  w.validate();
  return w;
}

std::string to_string(DemodulationMode mode) {
  return mode == DemodulationMode::TwoState ? "two-state" : "four-state";
}

DemodulationMode parse_mode(const std::string& text) {
  if (text == "two-state") return DemodulationMode::TwoState;
  if (text == "four-state") return DemodulationMode::FourState;
  throw ValidationError(fmt::format("unknown demodulation mode '{}'", text));
}

}  // namespace qkd
