#pragma once

#include <cstddef>
#include <vector>

#include "mfr/coefficients.hpp"
#include "mfr/measure.hpp"
#include "mfr/noise.hpp"
#include "mfr/regression.hpp"
#include "mfr/solution.hpp"

namespace mfr {

struct SolveOptions {
  double tol_inner = 1e-12;
  std::size_t max_inner = 10000;
};

/// Backward solver for a reflected BSDE with the measure flow held fixed.
/// Recursion per node k (descending): regress the continuation and the
/// martingale loadings
///   C_k   = E^[Y_{k+1} | state_k]
///   Z_k   = E^[Y_{k+1} dB_k | state_k] / dt
///   U_k^j = E^[Y_{k+1} dN~_k^j | state_k] / (lambda_j dt),
/// solve the implicit driver step y = C_k + f(t_k, y, Z_k, U_k, mu_k) dt by
/// fixed point (contractive for C_f dt < 1), then reflect: when the result
/// falls below the obstacle, Y_k is the unique root of y = h(t_k, y, mu_k)
/// (monotone for gamma1 < 1) and dK_k picks up the difference.
///
/// Refuses when C_f dt >= 1 or gamma1 >= 1.
SolutionBundle solve_rbsde(const NoiseBundle& noise, const CoefficientSet& coeffs,
                           const MeasureFlow& mu, const RegressionSpec& reg,
                           const SolveOptions& opts = {});

/// Reflected backward solve from `terminal_node` with explicit terminal
/// data; used by the intervalwise fixed-point construction. The returned
/// bundle covers nodes 0..terminal_node.
SolutionBundle solve_rbsde_partial(const NoiseBundle& noise, const CoefficientSet& coeffs,
                                   const MeasureFlow& mu, const RegressionSpec& reg,
                                   std::size_t terminal_node,
                                   const std::vector<double>& terminal_values,
                                   const SolveOptions& opts = {});

/// Plain (unreflected) backward solve from `terminal_node` with the given
/// terminal values: the driver-conditional expectation of the terminal data.
/// The returned bundle covers nodes 0..terminal_node.
SolutionBundle nonlinear_expectation(const NoiseBundle& noise, const CoefficientSet& coeffs,
                                     const MeasureFlow& mu, const RegressionSpec& reg,
                                     std::size_t terminal_node,
                                     const std::vector<double>& terminal_values,
                                     const SolveOptions& opts = {});

/// Average over particles of sum_k (Y_k - h(t_k, Y_k, mu_k)) dK_k.
double flatness_residual(const SolutionBundle& b, const CoefficientSet& coeffs,
                         const MeasureFlow& mu);

/// Evaluates terminal values xi(state_N) for every particle of the bundle's
/// noise. Convenience shared by solvers and experiments.
std::vector<double> terminal_values(const NoiseBundle& noise, const CoefficientSet& coeffs);

}  // namespace mfr
