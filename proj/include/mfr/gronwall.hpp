#pragma once

#include <cstddef>
#include <vector>

namespace mfr {

/// Backward integral-inequality check on a uniform grid: where the
/// hypothesis 0 <= g(t) <= c + int_t^T alpha g ds holds (trapezoid
/// quadrature), g must stay below c * exp(int_t^T alpha) up to quadrature
/// tolerance.
struct GronwallResult {
  std::vector<double> bound;  // c * exp(trapezoid integral of alpha)
  bool satisfied = false;     // hypothesis and conclusion hold at every node
  bool hypothesis_ok = false; // hypothesis holds at every node
  std::ptrdiff_t first_hypothesis_violation = -1;
  std::ptrdiff_t first_bound_violation = -1;
  double tolerance = 0.0;
};

/// tolerance < 0 selects an automatic O(dt^2) quadrature tolerance.
GronwallResult backward_gronwall(const std::vector<double>& g, const std::vector<double>& alpha,
                                 double c, double horizon, double tolerance = -1.0);

}  // namespace mfr
