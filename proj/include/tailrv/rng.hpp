#pragma once

#include <cmath>
#include <cstdint>

namespace tailrv {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Combine a seed with a stream tag into a fresh seed.
inline std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (tag << 6) + (tag >> 2));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

/// xoshiro256++ with deterministic substream derivation.  All randomness in
/// the library flows through this type so that results are reproducible for a
/// fixed (seed, worker-count) pair.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  /// Independent stream identified by (this stream's seed, tag).
  Rng derive(std::uint64_t tag) const { return Rng(seed_mix(seed_, tag)); }

  std::uint64_t next() {
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

  /// Uniform on [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1); safe under log and negative powers.
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Unit-rate exponential.
  double exponential() { return -std::log(uniform_open()); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the n used here.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream role tags.  Estimators derive worker substreams as
// seed -> derive(role) -> derive(worker), so distinct roles never share draws.
namespace role {
constexpr std::uint64_t representer = 0x521;
constexpr std::uint64_t pareto = 0x522;
constexpr std::uint64_t mixing = 0x523;
constexpr std::uint64_t gaussian = 0x524;
constexpr std::uint64_t dehaan = 0x525;
constexpr std::uint64_t scaler = 0x526;
constexpr std::uint64_t resample = 0x527;
constexpr std::uint64_t site_base = 0x1000;  // + site index
}  // namespace role

}  // namespace tailrv
