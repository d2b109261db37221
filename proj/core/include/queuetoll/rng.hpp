#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace queuetoll {

// Counter-based random stream.  Output k of stream (seed, a, b, c) is a pure
// function of (seed, a, b, c, k), so any (replication, class, purpose) tuple
// gets its own reproducible sequence regardless of scheduling order, and
// parallel consumers never share state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                        std::uint64_t c = 0)
      : key_(derive_key(seed, a, b, c)) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double exponential(double mean) {
    // log1p keeps the tail accurate and can't hit log(0).
    return -mean * std::log1p(-uniform01());
  }

  // Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to 0");
    double u = uniform01() * total;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      u -= weights[k];
      if (u < 0.0) return k;
    }
    return weights.size() - 1;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                  std::uint64_t c) {
    std::uint64_t k = mix(seed + kGamma);
    k = mix(k ^ (a + kGamma));
    k = mix(k ^ (b + kGamma));
    k = mix(k ^ (c + kGamma));
    return k;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace queuetoll
