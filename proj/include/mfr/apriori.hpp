#pragma once

#include <cstddef>
#include <vector>

#include "mfr/rbsde.hpp"

namespace mfr {

/// Sample statistics of RHS - LHS of the weighted p-th power stability
/// inequality for a pair of backward solves sharing noise and grid:
///   |e^{beta t} dY_t|^p <= 2^(p/2-1) ( E^[|e^{beta tau} dXi|^p | F_t]
///                        + eta^p E^[( int_t^tau |e^{beta s} dF_s|^2 ds )^(p/2) | F_t] )
/// with dF_s the driver difference evaluated along run 2's solution and
/// (eta, beta) from select_beta_eta of the larger Lipschitz constant.
/// Conditional expectations use the same regression estimator as the solver.
struct AprioriProbe {
  std::size_t node = 0;
  double mean_slack = 0.0;
  double stderr_slack = 0.0;
  double min_slack = 0.0;
};

struct AprioriReport {
  double eta = 1.0;
  double beta = 3.0;
  std::vector<AprioriProbe> probes;
};

AprioriReport apriori_check(const SolutionBundle& run1, const CoefficientSet& coeffs1,
                            const MeasureFlow& mu1, const SolutionBundle& run2,
                            const CoefficientSet& coeffs2, const MeasureFlow& mu2,
                            const NoiseBundle& noise, double p,
                            const std::vector<std::size_t>& probe_nodes,
                            const RegressionSpec& reg);

}  // namespace mfr
