#pragma once

#include <cstdint>
#include <string_view>

namespace dilemma {

/// SplitMix64 sequence generator. Small, fast, and identical on every
/// platform, which is what trial seeding needs.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed for one trial attempt. Splitting on (run seed, scenario
/// key, trial index, attempt) keeps every attempt independent of execution
/// order and parallelism.
inline std::uint64_t derive_trial_seed(std::uint64_t run_seed, std::string_view scenario_key,
                                       std::uint64_t trial_index, std::uint64_t attempt) {
  std::uint64_t h = mix64(run_seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ fnv1a64(scenario_key));
  h = mix64(h ^ (0x9e3779b97f4a7c15ULL * (trial_index + 1)));
  h = mix64(h ^ (0xbf58476d1ce4e5b9ULL * (attempt + 1)));
  return h;
}

}  // namespace dilemma
