// Copyright 2026 The rftbd Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <limits>

namespace rftbd {

/// Counter-based generator: output i is a SplitMix64 finalizer applied to
/// key + i * golden. Streams derived with split() are independent of how
/// many numbers the parent has produced, so per-particle and per-run streams
/// stay reproducible under any thread schedule.
///
/// Satisfies UniformRandomBitGenerator. Distributions here are written out
/// explicitly so results do not depend on the standard library vendor.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (counter_++) * kGolden); }

  /// Child stream keyed on (this key, id). Does not advance this stream.
  [[nodiscard]] Rng split(std::uint64_t id) const {
    Rng child;
    child.key_ = mix(key_ ^ mix(id + kGolden));
    child.counter_ = 0;
    return child;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method (no cached spare, so a
  /// stream's state is fully described by its counter).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace rftbd
