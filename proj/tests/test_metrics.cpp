#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ievlab/error.hpp"
#include "ievlab/metrics.hpp"

using namespace ievlab;
using namespace ievlab::metrics;

namespace {

// Exact mean of the displacement statistic over every ordered pair of
// permutations of size s, computed straight from the definition.
double brute_force_mean_iev(int s) {
  std::vector<int> a(s), b(s);
  std::iota(a.begin(), a.end(), 0);
  double total = 0.0;
  long long pairs = 0;
  do {
    std::iota(b.begin(), b.end(), 0);
    do {
      double sum = 0.0;
      for (int i = 0; i < s; ++i) sum += std::abs(a[i] - b[i]) / double(s - 1);
      total += sum / s;
      ++pairs;
    } while (std::next_permutation(b.begin(), b.end()));
  } while (std::next_permutation(a.begin(), a.end()));
  return total / double(pairs);
}

}  // namespace

TEST_CASE("rank_fitness orders ascending with index tie-break") {
  CHECK(rank_fitness(std::vector<double>{3.0, 1.0, 2.0}).positions() == std::vector<int>{2, 0, 1});
  CHECK(rank_fitness(std::vector<double>{5.0, 5.0, 1.0}).positions() == std::vector<int>{1, 2, 0});
  CHECK_THROWS_AS(rank_fitness(std::vector<double>{7.5}), InvalidInput);
  CHECK_THROWS_AS(rank_fitness(std::vector<double>{1.0, NAN}), InvalidInput);
  CHECK_THROWS_AS(rank_fitness(std::vector<double>{1.0, INFINITY}), InvalidInput);
}

TEST_CASE("Ranking rejects non-permutations") {
  CHECK_THROWS_AS(Ranking({0, 0}), InvalidInput);
  CHECK_THROWS_AS(Ranking({0, 2}), InvalidInput);
  CHECK_THROWS_AS(Ranking({0}), InvalidInput);
  CHECK_NOTHROW(Ranking({1, 0}));
}

TEST_CASE("iev examples") {
  CHECK(iev(Ranking({0, 1, 2, 3}), Ranking({0, 1, 2, 3})) == 0.0);
  CHECK(iev(Ranking({0, 1}), Ranking({1, 0})) == 1.0);
  CHECK(iev(Ranking({0, 1, 2, 3}), Ranking({3, 2, 1, 0})) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(iev(Ranking({0, 1}), Ranking({0, 1, 2})), InvalidInput);
}

TEST_CASE("iev expectation matches brute-force enumeration") {
  // Frozen from brute_force_mean_iev: (s+1)/(3s).
  for (int s = 2; s <= 5; ++s) {
    const double oracle = brute_force_mean_iev(s);
    CHECK(oracle == doctest::Approx((s + 1.0) / (3.0 * s)).epsilon(1e-12));
    CHECK(noise_baseline(static_cast<std::size_t>(s)) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("iev properties over random permutation pairs") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int s = 2 + static_cast<int>(gen() % 30);
    std::vector<int> a(s), b(s), relabel(s);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::iota(relabel.begin(), relabel.end(), 0);
    std::shuffle(a.begin(), a.end(), gen);
    std::shuffle(b.begin(), b.end(), gen);
    std::shuffle(relabel.begin(), relabel.end(), gen);
    const double v = iev(Ranking(a), Ranking(b));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v == iev(Ranking(b), Ranking(a)));
    CHECK((v == 0.0) == (a == b));
    // Same relabeling of individuals applied to both rankings.
    std::vector<int> ra(s), rb(s);
    for (int i = 0; i < s; ++i) {
      ra[relabel[i]] = a[i];
      rb[relabel[i]] = b[i];
    }
    CHECK(iev(Ranking(ra), Ranking(rb)) == v);
  }
}

TEST_CASE("rank_fitness is invariant to strictly increasing transforms") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f(20);
    for (auto& x : f) x = n01(gen);
    std::vector<double> scaled(f), shifted(f), cubed(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      scaled[i] = 3.5 * f[i];
      shifted[i] = f[i] + 100.0;
      cubed[i] = f[i] * f[i] * f[i];
    }
    const auto r = rank_fitness(f);
    CHECK(rank_fitness(scaled) == r);
    CHECK(rank_fitness(shifted) == r);
    CHECK(rank_fitness(cubed) == r);
  }
}

TEST_CASE("snr") {
  CHECK(snr(0.0) == 1.0);
  CHECK(snr(0.333) == 0.0);
  CHECK(snr(0.24975) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(snr(0.5) < 0.0);
  CHECK(snr(0.2) > snr(0.3));
  CHECK_THROWS_AS(snr(NAN), InvalidInput);
  CHECK(snr_exact(noise_baseline(40), 40) == 0.0);
  CHECK(snr_exact(0.0, 40) == 1.0);
}

TEST_CASE("iev_from_double_eval") {
  auto s = iev_from_double_eval(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4}, 7);
  CHECK(s.iev == 0.0);
  CHECK(s.snr == 1.0);
  CHECK(s.generation == 7);
  CHECK(iev_from_double_eval(std::vector<double>{1, 2}, std::vector<double>{2, 1}).iev == 1.0);
  CHECK_THROWS_AS(iev_from_double_eval(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), InvalidInput);

  // Snr field is always consistent with the iev field.
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n01;
  double total = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> a(100), b(100);
    for (auto& x : a) x = n01(gen);
    for (auto& x : b) x = n01(gen);
    const auto sample = iev_from_double_eval(a, b);
    CHECK(std::abs(sample.snr - (0.333 - sample.iev) / 0.333) < 1e-12);
    total += sample.iev;
  }
  CHECK(std::abs(total / 1000.0 - 101.0 / 300.0) < 0.005);
}

TEST_CASE("mean_iev") {
  std::vector<IevSample> v{{0.1, 0, 0}, {0.2, 0, 1}, {0.3, 0, 2}};
  CHECK(mean_iev(v) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(mean_iev(std::vector<IevSample>{{0.0, 1.0, 0}}) == 0.0);
  CHECK(mean_iev(std::vector<IevSample>(500, {0.25, 0.0, 0})) == 0.25);
  CHECK_THROWS_AS(mean_iev(std::vector<IevSample>{}), InvalidInput);
}
