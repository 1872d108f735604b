#include "qkd/channel.hpp"

#include <fmt/format.h>

#include "qkd/error.hpp"

namespace qkd {

void EveStrategy::validate() const {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw ValidationError(fmt::format("p1 = {} outside [0, 1]", p1));
  if (!(channel_transmittance > 0.0 && channel_transmittance <= 1.0)) {
    throw ValidationError(
        fmt::format("channel transmittance {} outside (0, 1]", channel_transmittance));
  }
}

ChannelOutcome apply_channel(const EveStrategy& strategy, Rng& rng) {
  ChannelOutcome out;
  if (strategy.kind == EveKind::TwoPoint) {
    out.label = uniform01(rng) < strategy.p1 ? 0 : 1;
  }
  out.shift_ps = strategy.shift_for(out.label);
  if (strategy.channel_transmittance < 1.0) {
    out.transmitted = uniform01(rng) < strategy.channel_transmittance;
  }
  return out;
}

}  // namespace qkd
