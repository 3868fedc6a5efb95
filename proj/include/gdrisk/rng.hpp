#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gdrisk {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream (xoshiro256++ core, Box-Muller normals).
//
// Streams for independent trials are derived from (master_seed, stream_index)
// by a counter-based mix, so trial i draws the same numbers no matter how
// trials are scheduled across worker threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& word : state_) word = splitmix64_next(st);
  }

  static RngStream for_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t st = master_seed;
    const std::uint64_t a = splitmix64_next(st);
    st ^= 0xd1b54a32d192ed03ULL * (stream_index + 1);
    const std::uint64_t b = splitmix64_next(st);
    return RngStream(a ^ (b + 0x9e3779b97f4a7c15ULL * stream_index));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // ±1 with equal probability (unit variance, zero mean).
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gdrisk
