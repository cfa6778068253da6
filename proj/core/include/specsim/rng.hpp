#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace specsim {

// Deterministic pseudorandom primitives used everywhere a seeded value is
// needed. Standard-library distributions are implementation-defined, so all
// draws below are built from the SplitMix64 finalizer only; outputs are
// bit-identical across compilers and platforms.

constexpr std::uint64_t kMixGamma = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += kMixGamma;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + kMixGamma + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash_tokens(std::uint64_t seed, std::span<const int> tokens) {
  std::uint64_t h = mix64(seed);
  for (int t : tokens) h = hash_combine(h, static_cast<std::uint64_t>(t) + 1);
  return h;
}

// Maps a 64-bit hash to a double in [0,1) using the top 53 bits.
constexpr double to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Counter-based stream: state advances by hashing, never by modular
// recurrence, so any draw is a pure function of (seed, counter).
class SplitMixStream {
 public:
  explicit SplitMixStream(std::uint64_t seed) : state_(mix64(seed)) {}

  std::uint64_t next_u64() {
    state_ += kMixGamma;
    return mix64(state_);
  }

  double next_unit() { return to_unit(next_u64()); }

  // Box-Muller on two explicit uniform draws.
  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Exponential inter-arrival gap with the given rate (events per unit time).
  double next_exp(double rate) {
    double u = next_unit();
    if (u <= 0.0) u = 0x1.0p-53;
    return -std::log(u) / rate;
  }

  int next_int(int lo, int hi) {  // inclusive bounds
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

 private:
  std::uint64_t state_;
};

// Derives an independent child seed for a named sub-stream.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag));
}

}  // namespace specsim
