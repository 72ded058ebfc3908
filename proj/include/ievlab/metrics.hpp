#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ievlab::metrics {

/// Noise-only baseline used by the SNR definition.
inline constexpr double kSnrBaseline = 0.333;

/// Rank positions of a population: positions[i] is the rank of individual i,
/// 0 = lowest fitness. Always a permutation of {0, ..., s-1} with s >= 2.
class Ranking {
 public:
  /// Validates that `positions` is a permutation of size >= 2.
  explicit Ranking(std::vector<int> positions);

  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<int>& positions() const noexcept { return positions_; }
  int operator[](std::size_t i) const { return positions_[i]; }

  friend bool operator==(const Ranking&, const Ranking&) = default;

 private:
  std::vector<int> positions_;
};

struct IevSample {
  double iev = 0.0;
  double snr = 1.0;
  int generation = 0;
};

/// Ranks fitness values ascending. Equal values are ordered by index, the
/// lower index receiving the lower rank.
Ranking rank_fitness(std::span<const double> fitness);

/// Mean absolute rank displacement between two evaluations, normalized to [0, 1].
double iev(const Ranking& r1, const Ranking& r2);

/// (0.333 - iev) / 0.333. Not clamped.
double snr(double iev_value);

/// SNR against the exact noise expectation (s+1)/(3s) for population size s.
double snr_exact(double iev_value, std::size_t s);

/// Expected IEV of two independent uniformly random rankings of size s.
double noise_baseline(std::size_t s);

IevSample iev_from_double_eval(std::span<const double> fitness1, std::span<const double> fitness2,
                               int generation = 0);

double mean_iev(std::span<const IevSample> samples);

}  // namespace ievlab::metrics
