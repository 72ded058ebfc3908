#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ievlab {

/// Named random streams derived from one master seed. Every consumer of
/// randomness owns exactly one stream, keyed further by (generation,
/// candidate, ...) so evaluation order never changes the numbers drawn.
enum class Stream : std::uint64_t {
  kReplication = 1,
  kInit = 2,
  kSampling = 3,
  kPass1 = 4,
  kPass2 = 5,
  kCenter = 6,
  kNormalizer = 7,
  kPostEval = 8,
  kTarget = 9,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::initializer_list<std::uint64_t> keys = {}) noexcept {
  std::uint64_t h = mix64(master ^ mix64(static_cast<std::uint64_t>(stream)));
  for (const auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

/// Seeded generator. Draws are always consumed even when scaled by zero,
/// so the stream position never depends on a noise amplitude.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double normal(double stddev) { return stddev * normal_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace ievlab
