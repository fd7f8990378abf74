#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace adascale {

/// Counter-based random stream.
///
/// A stream is identified by a 64-bit key derived from (seed, a, b); the n-th
/// output is the SplitMix64 finalizer applied to key + n * golden_gamma. Any
/// (seed, iteration, worker) triple therefore owns an independent substream
/// that can be created on demand without touching shared state, so results do
/// not depend on the order in which workers run.
///
/// Satisfies UniformRandomBitGenerator, so standard distributions work on it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Child stream keyed by this stream's key and `index`; does not advance `*this`.
  RngStream substream(std::uint64_t index) const;

  /// Uniform in [0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix64(std::uint64_t z);

 private:
  struct KeyTag {};
  RngStream(KeyTag, std::uint64_t key) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace adascale
