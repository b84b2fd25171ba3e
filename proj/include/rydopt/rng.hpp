#pragma once

#include <cstdint>
#include <random>

namespace rydopt {

// Seed mixing via SplitMix64 so derived streams (per realization, per
// super-iteration, per field) are decorrelated and platform-stable.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(base, a), b);
}

// mt19937_64 output is pinned by the standard; converting the raw bits
// ourselves keeps the double stream identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; used where an open lower endpoint matters.
  double uniform01_open_low() { return 1.0 - uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rydopt
