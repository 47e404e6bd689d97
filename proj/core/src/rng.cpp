#include "logitrank/rng.hpp"

#include <cmath>
#include <numbers>

#include "logitrank/error.hpp"

namespace logitrank {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t parent, std::string_view purpose,
                         std::uint64_t index) {
  std::uint64_t k = mix(parent + kGolden);
  k = mix(k ^ hash_tag(purpose));
  k = mix(k ^ (index * kGolden + 0x632BE59BD9B4E019ULL));
  return k;
}

}  // namespace

std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed, std::string_view purpose, std::uint64_t index)
    : key_(derive_key(seed, purpose, index)) {}

Rng Rng::substream(std::string_view purpose, std::uint64_t index) const {
  return Rng(derive_key(key_, purpose, index), 0, 0);
}

Rng::result_type Rng::operator()() {
  return mix(key_ ^ mix(++counter_ * kGolden));
}

double Rng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ValidationError("Rng::below: empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % n;
}

}  // namespace logitrank
