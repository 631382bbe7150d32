#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace gscan {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // sum of local Richardson error estimates
  std::size_t evaluations = 0;
};

// Adaptive Simpson on [a, b] to absolute tolerance `tol`. Each accepted panel
// is Richardson-corrected; panels deeper than `max_depth` are accepted as-is
// and their estimate still counts toward `error`.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double tol,
                                  int max_depth = 40);

}  // namespace gscan
