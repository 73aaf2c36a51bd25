#pragma once

// Seedable generator used for every random decision in the library.
//
// Algorithm: xoshiro256** (Blackman & Vigna), state seeded by expanding a
// 64-bit key with splitmix64. Conversions:
//   uniform01  = (next() >> 11) * 2^-53, exactly representable, in [0, 1)
//   normal     = Box-Muller on two uniform01 draws, no cached second value
//   below(n)   = Lemire's multiply-shift with rejection, unbiased
// Child generators come from split(label): the child key is a hash of the
// parent's key and the label, so it never depends on how many values the
// parent has drawn.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "augsearch/error.hpp"

namespace augsearch {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t x = a ^ (b * 0x9E3779B97F4A7C15ULL);
  return splitmix64(x);
}

// FNV-1a, 64-bit.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : key_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t key() const noexcept { return key_; }

  Rng split(std::uint64_t label) const noexcept { return Rng(mix64(key_, label)); }
  Rng split(std::string_view label) const noexcept { return split(hash_label(label)); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Value in [lo, hi); lo == hi returns lo.
  double uniform(double lo, double hi) {
    if (!(lo <= hi)) fail(ErrorKind::Parameter, "uniform: lo must not exceed hi");
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * uniform01();
    return v < hi ? v : std::nextafter(hi, lo);
  }

  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) fail(ErrorKind::Parameter, "below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) fail(ErrorKind::Parameter, "integer: lo must not exceed hi");
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Parameter, "bernoulli: p must lie in [0, 1]");
    if (p == 0.0) return false;
    if (p == 1.0) return true;
    return uniform01() < p;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
};

inline double rng_uniform(Rng& rng, double lo, double hi) { return rng.uniform(lo, hi); }

}  // namespace augsearch
