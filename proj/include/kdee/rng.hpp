#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace kdee {

// SplitMix64 (Steele/Lea/Flood). Small, fast, and trivially splittable: all
// simulator streams are derived from (seed, tag, indices) so corpus generation
// is order-independent and bitwise reproducible on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_positive() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [lo, hi] inclusive.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;  // hi >= lo; span 0 means full range
    if (span == 0) return next_u64();
    const auto wide = static_cast<unsigned __int128>(next_u64()) * span;
    return lo + static_cast<std::uint64_t>(wide >> 64);
  }

  // Standard normal via Box-Muller (no rejection, so the draw count per call
  // is fixed and streams never desynchronize).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_positive();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace rng_detail {
constexpr std::uint64_t fnv1a(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}
constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace rng_detail

// Derives an independent stream seed from a root seed, a component tag, and up
// to three indices (trial, grid point, sub-channel, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = seed;
  h = rng_detail::mix(h ^ rng_detail::fnv1a(tag));
  h = rng_detail::mix(h ^ (a + 0x9E3779B97F4A7C15ull));
  h = rng_detail::mix(h ^ (b + 0xC2B2AE3D27D4EB4Full));
  h = rng_detail::mix(h ^ (c + 0x165667B19E3779F9ull));
  return h;
}

inline SplitMix64 derive_stream(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  return SplitMix64(derive_seed(seed, tag, a, b, c));
}

}  // namespace kdee
