#pragma once

// Scenario builders shared by the solver test suites.

#include <cmath>
#include <vector>

#include "mfr/coefficients.hpp"
#include "mfr/measure.hpp"

namespace mfr::testing {

inline CoefficientSet base_coeffs(double p = 2.0) {
  CoefficientSet c;
  c.p = p;
  make_driver("zero", {}, JumpMeasure{}, c);
  make_obstacle("none", {}, TimeGrid(1.0, 1), c);
  make_terminal("constant", {{"value", 0.0}}, c);
  return c;
}

/// Flow that is a point mass at value[k] at node k.
inline MeasureFlow frozen_flow(const std::vector<double>& node_values, std::size_t count) {
  std::vector<EmpiricalMeasure> per;
  per.reserve(node_values.size());
  for (double v : node_values) per.push_back(EmpiricalMeasure::point_mass(v, count));
  return MeasureFlow(std::move(per));
}

}  // namespace mfr::testing
