#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace gscan {

// Pairwise summation in index order; the result depends only on the values
// and their order.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single sample
  double standard_error = 0.0;
};

inline SampleSummary summarize(std::span<const double> x) {
  SampleSummary s;
  if (x.empty()) return s;
  const double n = static_cast<double>(x.size());
  s.mean = pairwise_sum(x) / n;
  if (x.size() > 1) {
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - s.mean) * (x[i] - s.mean);
    s.variance = pairwise_sum(sq) / (n - 1.0);
    s.standard_error = std::sqrt(s.variance / n);
  }
  return s;
}

// Empirical quantile with linear interpolation between order statistics
// (type 7). `sorted` must be ascending and non-empty.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace gscan
