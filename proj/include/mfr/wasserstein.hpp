#pragma once

#include <span>

#include "mfr/measure.hpp"

namespace mfr {

/// p-Wasserstein distance between two equal-size empirical measures given as
/// ascending sample arrays, via the sorted (monotone) coupling, which is
/// optimal in one dimension. Unequal sizes are a parameter error; see
/// wasserstein_p_general for the caller-side alternative.
double wasserstein_p(std::span<const double> a_sorted, std::span<const double> b_sorted, double p);

/// p-Wasserstein distance between empirical measures of (possibly) different
/// sizes, exact via the quantile-function coupling.
double wasserstein_p_general(std::span<const double> a_sorted, std::span<const double> b_sorted,
                             double p);

double wasserstein_p(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p);

/// max over grid nodes of the node-wise p-Wasserstein distance.
double sup_time_wasserstein(const MeasureFlow& a, const MeasureFlow& b, double p);

}  // namespace mfr
