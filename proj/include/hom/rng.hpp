#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace hom {

/// Seedable generator with deterministic child streams.
///
/// Children are keyed by (seed, path...) through std::seed_seq, so a scan
/// point or gate batch gets the same stream no matter which worker runs it.
/// Variates are built from raw engine output rather than <random>
/// distributions so the streams do not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, {}) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Failures before the first success of a Bernoulli(q) sequence.
  std::uint64_t geometric(double q);

  /// Poisson variate by inversion, capped at `cap` (excess mass lands on `cap`).
  int poisson(double mean, int cap = std::numeric_limits<int>::max());

 private:
  std::mt19937_64 engine_;
};

}  // namespace hom
