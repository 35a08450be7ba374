#pragma once

#include <cstdint>
#include <random>

namespace driftguard {

// splitmix64 step; used to derive independent stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// Deterministic uniform source. mt19937_64 output is fixed by the ISO C++
// spec, and the [0,1) mapping below uses the top 53 bits, so identical seeds
// give identical streams on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t next_raw() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

// Stateless per-step uniform in [0, 1); pure function of (seed, counter).
inline double hash_uniform01(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(derive_seed(seed, counter) >> 11) * 0x1.0p-53;
}

}  // namespace driftguard
