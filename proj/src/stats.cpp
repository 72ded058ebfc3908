#include "ievlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "ievlab/error.hpp"

namespace ievlab::stats {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-16;

// P(a, x) by its power series; converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz continued fraction; used for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw InvalidInput("gamma_q needs a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi2_sf(double x, int df) {
  if (df < 1) throw InvalidInput("chi-square needs df >= 1");
  if (!(x >= 0.0)) throw InvalidInput("chi-square needs x >= 0");
  if (x <= 0.0) return 1.0;
  return std::clamp(gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

KwResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  const auto k = groups.size();
  if (k < 2) throw InvalidInput("Kruskal-Wallis needs at least 2 groups");
  struct Item {
    double value;
    std::size_t group;
  };
  std::vector<Item> pooled;
  for (std::size_t j = 0; j < k; ++j) {
    if (groups[j].empty()) throw InvalidInput("Kruskal-Wallis group " + std::to_string(j) + " is empty");
    for (double v : groups[j]) {
      if (!std::isfinite(v)) throw InvalidInput("non-finite value in group " + std::to_string(j));
      pooled.push_back({v, j});
    }
  }
  const auto n_total = pooled.size();
  if (n_total < 3) throw InvalidInput("Kruskal-Wallis needs at least 3 observations");
  std::stable_sort(pooled.begin(), pooled.end(), [](const Item& a, const Item& b) { return a.value < b.value; });

  std::vector<double> rank_sum(k, 0.0);
  double tie_term = 0.0;
  std::size_t lo = 0;
  while (lo < n_total) {
    std::size_t hi = lo;
    while (hi + 1 < n_total && pooled[hi + 1].value == pooled[lo].value) ++hi;
    const double mid_rank = 0.5 * static_cast<double>(lo + hi) + 1.0;
    for (std::size_t r = lo; r <= hi; ++r) rank_sum[pooled[r].group] += mid_rank;
    const auto t = static_cast<double>(hi - lo + 1);
    tie_term += t * t * t - t;
    lo = hi + 1;
  }

  const auto n = static_cast<double>(n_total);
  const double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0.0) throw DegenerateData("all pooled values are identical");

  const double centre = 0.5 * (n + 1.0);
  double ss = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto nj = static_cast<double>(groups[j].size());
    const double mean_rank = rank_sum[j] / nj;
    ss += nj * (mean_rank - centre) * (mean_rank - centre);
  }
  KwResult out;
  out.h = 12.0 / (n * (n + 1.0)) * ss / correction;
  out.df = static_cast<int>(k) - 1;
  out.tie_correction = correction;
  out.p = chi2_sf(out.h, out.df);
  return out;
}

std::string format_p(double p) {
  if (p < 0.001) return "p<.001";
  char buf[32];
  std::snprintf(buf, sizeof buf, "p=%.4g", p);
  return buf;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sequence");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("summarize of an empty sequence");
  const auto n = static_cast<double>(values.size());
  Summary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.median = quantile_sorted(sorted, 0.5);
  s.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  return s;
}

}  // namespace ievlab::stats
