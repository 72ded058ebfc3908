#include "ievlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

#include "ievlab/error.hpp"

namespace ievlab::metrics {

Ranking::Ranking(std::vector<int> positions) : positions_(std::move(positions)) {
  const auto s = positions_.size();
  if (s < 2) throw InvalidInput("ranking needs at least 2 individuals, got " + std::to_string(s));
  std::vector<char> seen(s, 0);
  for (const int p : positions_) {
    if (p < 0 || static_cast<std::size_t>(p) >= s || seen[static_cast<std::size_t>(p)])
      throw InvalidInput("ranking positions are not a permutation of 0.." + std::to_string(s - 1));
    seen[static_cast<std::size_t>(p)] = 1;
  }
}

Ranking rank_fitness(std::span<const double> fitness) {
  const auto s = fitness.size();
  if (s < 2) throw InvalidInput("rank_fitness needs at least 2 values, got " + std::to_string(s));
  for (std::size_t i = 0; i < s; ++i) {
    if (!std::isfinite(fitness[i])) throw InvalidInput("non-finite fitness at index " + std::to_string(i));
  }
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
  std::vector<int> positions(s);
  for (std::size_t r = 0; r < s; ++r) positions[order[r]] = static_cast<int>(r);
  return Ranking(std::move(positions));
}

double iev(const Ranking& r1, const Ranking& r2) {
  if (r1.size() != r2.size()) {
    throw InvalidInput("ranking length mismatch: " + std::to_string(r1.size()) + " vs " +
                       std::to_string(r2.size()));
  }
  const auto s = r1.size();
  // Integer accumulation keeps the sum exact; one division at the end.
  long long total = 0;
  for (std::size_t i = 0; i < s; ++i) total += std::llabs(static_cast<long long>(r1[i]) - r2[i]);
  return static_cast<double>(total) / (static_cast<double>(s - 1) * static_cast<double>(s));
}

double snr(double iev_value) {
  if (!std::isfinite(iev_value)) throw InvalidInput("snr of non-finite IEV");
  return (kSnrBaseline - iev_value) / kSnrBaseline;
}

double noise_baseline(std::size_t s) {
  if (s < 2) throw InvalidInput("noise baseline needs s >= 2");
  const auto n = static_cast<double>(s);
  return (n + 1.0) / (3.0 * n);
}

double snr_exact(double iev_value, std::size_t s) {
  if (!std::isfinite(iev_value)) throw InvalidInput("snr of non-finite IEV");
  const double b = noise_baseline(s);
  return (b - iev_value) / b;
}

IevSample iev_from_double_eval(std::span<const double> fitness1, std::span<const double> fitness2,
                               int generation) {
  if (fitness1.size() != fitness2.size()) {
    throw InvalidInput("evaluation passes differ in length: " + std::to_string(fitness1.size()) +
                       " vs " + std::to_string(fitness2.size()));
  }
  const double value = iev(rank_fitness(fitness1), rank_fitness(fitness2));
  return {value, snr(value), generation};
}

double mean_iev(std::span<const IevSample> samples) {
  if (samples.empty()) throw InvalidInput("mean_iev of an empty sequence");
  double sum = 0.0;
  for (const auto& s : samples) sum += s.iev;
  return sum / static_cast<double>(samples.size());
}

}  // namespace ievlab::metrics
