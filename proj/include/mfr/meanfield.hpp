#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfr/rbsde.hpp"

namespace mfr {

struct PicardOptions {
  enum class Mode { global, interval };
  Mode mode = Mode::global;
  double tol_picard = 1e-8;
  std::size_t max_iter = 60;
  bool allow_unproven = false;  // run even when the smallness check fails
  SolveOptions inner;
};

struct PicardStep {
  std::size_t iteration = 0;
  std::size_t band = 0;  // interval mode: which backward band
  double delta = 0.0;    // sup-node Wasserstein move of the measure flow
  double seconds = 0.0;
};

struct MeanFieldSolution {
  SolutionBundle bundle;
  MeasureFlow flow;
  std::vector<PicardStep> trace;
  std::size_t bands = 1;
  double band_width = 0.0;         // interval mode: time width of a band
  double contraction_bound = 0.0;  // interval mode: bound on the per-band Picard ratio
};

/// Solves the mean-field reflected system by Picard iteration over measure
/// flows: start from the flow of point masses at 0, alternate a fixed-flow
/// backward solve with re-extraction of the empirical flow of Y, and stop
/// when the sup-node p-Wasserstein move falls below tol_picard.
///
/// Interval mode runs the same iteration backward band by band, the band
/// width chosen from the contraction estimate
///   delta < ( 2^(1-p/2) (1 - 2^(3p/2-1)(gamma1^p + gamma2^p)) / (eta C_f)^p )^(2/p),
/// pasting converged bands right to left.
///
/// Refuses when the existence smallness check fails (unless allow_unproven),
/// throws DivergedError with the trace on non-convergence.
MeanFieldSolution solve_meanfield(const CoefficientSet& coeffs, const TimeGrid& grid,
                                  const JumpMeasure& nu, std::size_t samples,
                                  const RegressionSpec& reg, std::uint64_t seed,
                                  const PicardOptions& opts = {});

/// Writes the Picard trace as CSV (iter, sup_wasserstein_delta, wall_time).
void write_trace_csv(const std::vector<PicardStep>& trace, const std::string& path);

/// Writes a measure flow as CSV (node, sample, value).
void write_flow_csv(const MeasureFlow& flow, const std::string& path);

/// Cells (particle, node) where a reflection increment above the threshold
/// occurred with no Poisson event in the step: the grid proxy for a jump of
/// K at a predictable time. For obstacles declared separable with a
/// left-u.s.c. time term, the flagged mass should shrink under grid
/// refinement.
struct KContinuityReport {
  std::size_t flagged_cells = 0;
  double flagged_mass = 0.0;  // summed flagged dK per particle
  std::vector<std::size_t> flags_per_node;
  bool obstacle_separable_lusc = false;
};

KContinuityReport continuity_of_k_diagnostic(const SolutionBundle& bundle,
                                             const NoiseBundle& noise,
                                             const CoefficientSet& coeffs, double jump_threshold);

}  // namespace mfr
