#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfr/rbsde.hpp"

namespace mfr {

struct ParticleOptions {
  double tol_inner_vec = 1e-11;  // convergence of the coupled per-node sweep
  std::size_t max_sweeps = 500;
  SolveOptions inner;
};

/// Solves the coupled n-particle reflected system: the backward recursion of
/// solve_rbsde, except that the empirical measure of the current Y-vector
/// enters driver and obstacle, so each node solves an n-dimensional fixed
/// point by synchronous sweeps (contractive when C_f dt + gamma1 + gamma2 is
/// inside the smallness regime).
///
/// Every cross-particle reduction (regressions, empirical measures) runs in
/// a canonical order, so relabelling (terminal values, noise streams) by a
/// permutation permutes the output bit-exactly.
///
/// Refuses when some terminal value falls below the obstacle at the terminal
/// empirical measure; throws DivergedError when a node sweep exceeds its cap.
SolutionBundle solve_particle_system(const NoiseBundle& noise, const CoefficientSet& coeffs,
                                     const RegressionSpec& reg,
                                     const std::vector<double>& terminal,
                                     const ParticleOptions& opts = {});

/// Magnitude of the regression coefficient of particle i's Y-increments
/// against particle j's Brownian increments (time-series over nodes); the
/// off-diagonal entries should sit at the noise floor.
struct OffDiagonalEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double coefficient = 0.0;
};

std::vector<OffDiagonalEntry> offdiagonal_diagnostic(const SolutionBundle& bundle,
                                                     const NoiseBundle& noise,
                                                     std::size_t max_particles = 8);

/// CSV with columns (i, j, coefficient).
void write_offdiagonal_csv(const std::vector<OffDiagonalEntry>& entries, const std::string& path);

}  // namespace mfr
