#pragma once

// Independent reference computations for the tests and the oracle subcommand.
// Each takes a different route from the library code it checks.

#include <cstdint>
#include <span>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/detector_model.hpp"
#include "qkd/keyrate.hpp"
#include "qkd/protocol.hpp"

namespace qkd::oracle {

/// Walk every (photon path, photon detected, dark0, dark1) branch.
ClickProbabilities enumerate_clicks(double phi_a, double phi_b_eff, double visibility, double eta0,
                                    double eta1, double dark0, double dark1);

/// Per-pulse sifted outcome masses from the 4 x |Bob| x click tree, pushing
/// every leaf through qkd::sift. Double clicks split evenly between detectors.
ShiftOutcome enumerate_outcome(const DetectorPair& pair, const ReceiverConfig& receiver,
                               double shift_ps);

struct VertexBounds {
  bool feasible = false;
  double p_succ_min = 0.0;
  double e_phase_max = 0.0;
};

/// Optimum over every one- and two-bin support that meets the error
/// constraint. Exhaustive, so only for small bin counts.
VertexBounds vertex_enumeration(const BinModel& model, double e_bit_obs);

/// Plug-in I(bit; label | basis) from a record stream of a two-point attack.
double plugin_mutual_information(std::span<const PulseRecord> records, const EveStrategy& strategy);

/// Standard deviation of the bias contrast over bootstrap replicates of a
/// sifted sample with the given logical counts.
double bootstrap_bias_sigma(std::uint64_t c0, std::uint64_t c1, int replicates, std::uint64_t seed);

/// Binary entropy in 50-digit arithmetic.
double binary_entropy_precise(double x);

/// Curves with independent uniform efficiencies in [lo, hi] on n bins.
DetectorPair random_pair(Rng& rng, std::size_t bins, double dt_ps, double lo = 0.0,
                         double hi = 1.0, double dark = 0.0);

}  // namespace qkd::oracle

namespace qkd::oracle {

struct RandomLpInstance {
  BinModel model;
  double e_bit_obs = 0.0;
};

/// Random bin model on n bins. Roughly one instance in ten asks for an
/// observed error outside the reachable range.
RandomLpInstance random_lp_instance(Rng& rng, std::size_t bins);

}  // namespace qkd::oracle
