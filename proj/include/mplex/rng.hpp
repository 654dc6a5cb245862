#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mplex {

inline std::uint64_t splitmix64_next(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with splitmix64 state expansion. Used everywhere a
// reproducible stream is required; std:: distributions are avoided because
// their draw sequences are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& w : state_) w = splitmix64_next(seed);
  }

  // Independent substream for one (edge, layer). Outputs are identical
  // no matter how edges are partitioned across workers.
  static Rng edge_stream(std::uint64_t seed, std::uint64_t i, std::uint64_t j,
                         std::uint64_t layer) {
    std::uint64_t x = seed;
    x ^= splitmix64_next(x) + 0x8f1bbcdcbfa53e0bULL * (i + 1);
    x ^= splitmix64_next(x) + 0x2545f4914f6cdd1dULL * (j + 1);
    x ^= splitmix64_next(x) + 0xd6e8feb86659fd93ULL * (layer + 1);
    return Rng(x);
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

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Strictly positive exponential variate.
  double next_exponential(double rate) {
    return -std::log1p(-next_uniform()) / rate;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace mplex
