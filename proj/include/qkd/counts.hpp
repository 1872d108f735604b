#pragma once

#include <cstdint>

namespace qkd {

/// Aggregate detection counts for one session. c0/c1 count sifted events by
/// logical detector.
struct CountsSummary {
  std::uint64_t c0 = 0;
  std::uint64_t c1 = 0;
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
  std::uint64_t n_pulses = 0;

  CountsSummary& operator+=(const CountsSummary& other) {
    c0 += other.c0;
    c1 += other.c1;
    sifted += other.sifted;
    errors += other.errors;
    n_pulses += other.n_pulses;
    return *this;
  }
  friend CountsSummary operator+(CountsSummary a, const CountsSummary& b) { return a += b; }
  friend bool operator==(const CountsSummary&, const CountsSummary&) = default;

  [[nodiscard]] bool consistent() const {
    return c0 + c1 == sifted && errors <= sifted && sifted <= n_pulses;
  }
};

}  // namespace qkd
