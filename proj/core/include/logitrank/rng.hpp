#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace logitrank {

/// Counter-based pseudo-random generator.
///
/// Draw i of a stream is a pure function of (key, i), where the key is
/// derived from (seed, purpose tag, index). Substreams for independent
/// work items are therefore reproducible regardless of which thread
/// consumes them or in what order. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::string_view purpose = {},
               std::uint64_t index = 0);

  // Independent child stream keyed by (this stream's key, purpose, index).
  Rng substream(std::string_view purpose, std::uint64_t index = 0) const;

  result_type operator()();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller.
  double normal();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stable 64-bit hash of a tag string (FNV-1a); used for key derivation.
std::uint64_t hash_tag(std::string_view tag);

}  // namespace logitrank
