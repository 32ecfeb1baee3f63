#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cfshrink {

// Splittable stream RNG: xoshiro256++ state derived via SplitMix64 from
// (master seed, stream index). Distinct stream indices give independent,
// reproducible streams; every draw is a pure function of (seed, index,
// position), so parallel replications never share a generator.
//
// Normals come from Box-Muller on 53-bit uniforms instead of
// std::normal_distribution, whose output is implementation-defined.
class RngStream {
 public:
  static constexpr const char* kGeneratorName =
      "xoshiro256++ (splitmix64-derived streams, Box-Muller normals)";

  explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_index = 0) {
    std::uint64_t x = master_seed;
    (void)splitmix64(x);  // decorrelate nearby master seeds
    x ^= 0xd1342543de82ef95ULL * (stream_index + 1);
    for (auto& s : state_) s = splitmix64(x);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0)
      state_[0] = 0x9e3779b97f4a7c15ULL;
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

  // uniform on [0, 1), 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal; generates a Box-Muller pair and caches the second value
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace cfshrink
