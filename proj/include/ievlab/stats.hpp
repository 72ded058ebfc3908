#pragma once

#include <span>
#include <string>
#include <vector>

namespace ievlab::stats {

struct KwResult {
  double h = 0.0;
  int df = 0;
  double p = 1.0;
  double tie_correction = 1.0;
};

/// Kruskal-Wallis H test on pooled mid-ranks with the cubic tie correction.
KwResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

/// Upper-tail chi-square probability P(X > x) for `df` degrees of freedom.
double chi2_sf(double x, int df);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Formats a p-value the way reports print it: "p<.001" below 0.001, else "p=0.0273".
std::string format_p(double p);

struct Summary {
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator); 0 for a single value.
  double std = 0.0;
  double median = 0.0;
  /// Q3 - Q1 with linear interpolation between order statistics.
  double iqr = 0.0;
};

Summary summarize(std::span<const double> values);

/// Linearly interpolated quantile of already sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace ievlab::stats
