#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace auvlab {

/// Deterministic random source used everywhere randomness is needed.
///
/// xoshiro256++ with splitmix64 seeding.  The generator state is four
/// 64-bit words that can be copied in and out verbatim, so checkpoints
/// restore the exact stream.  std::mt19937 and the std distributions are
/// avoided on purpose: their output is not pinned across standard library
/// implementations, and run histories here must be byte-reproducible.
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  Rng() : Rng(0x9e3779b97f4a7c15ull) {}

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.  Only the cosine branch is used so
  /// one draw consumes exactly two words; no hidden cache state survives
  /// between calls, which keeps serialized state complete.
  double normal() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniformly distributed direction on the unit sphere.
  Eigen::Vector3d unit_vector() {
    while (true) {
      Eigen::Vector3d v(normal(), normal(), normal());
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  State state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

  /// Stable mixing of a base seed with stream labels, used to derive
  /// independent per-episode and per-purpose seeds from one run seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0) {
    std::uint64_t x = seed;
    x = splitmix64(x) ^ a;
    x = splitmix64(x) ^ b;
    return splitmix64(x);
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  State s_{};
};

}  // namespace auvlab
