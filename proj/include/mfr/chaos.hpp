#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mfr/lln.hpp"
#include "mfr/meanfield.hpp"
#include "mfr/particles.hpp"
#include "mfr/smallness.hpp"

namespace mfr {

/// One (n, rep) cell of a propagation-of-chaos run: error metrics between
/// the n-particle system and n limit copies driven by the same noise and
/// terminal randomness (synchronous coupling).
struct ChaosCell {
  std::size_t n = 0;
  std::size_t rep = 0;
  double err_y_supw = 0.0;  // sup-node W_p^p between the Y flows
  double err_y_sp = 0.0;    // mean over particles of sup-node |dY|^p
  double err_z = 0.0;       // mean over particles of (sum dZ^2 dt)^(p/2)
  double err_u = 0.0;       // mean over particles of (sum |dU|_nu^2 dt)^(p/2)
  double err_k = 0.0;       // mean over particles of sup-node |dK|^p
  double seconds = 0.0;

  /// Sum of the per-component norms (p-th roots of the stored powers).
  double component_sum(double p) const;
};

struct ChaosSummaryRow {
  std::size_t n = 0;
  std::size_t reps = 0;
  double mean_supw = 0.0;
  double se_supw = 0.0;
  double mean_component = 0.0;
  double se_component = 0.0;
};

struct ChaosReport {
  std::vector<ChaosCell> cells;
  std::vector<ChaosSummaryRow> summary;
  double metric_p = 2.0;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  double wall_seconds = 0.0;
  bool complete = true;  // false when the budget cut the ladder short

  // worst structural residuals over every bundle solved by the run
  double worst_domination = 0.0;  // min over bundles of min (Y - h)
  double worst_flatness = 0.0;    // max over bundles of |sum (Y - h) dK|
};

/// Error metrics between an n-system bundle and the coupled limit copies.
/// Per-particle reductions accumulate in sorted order, so the metrics are
/// invariant under a simultaneous relabelling of both bundles.
ChaosCell chaos_metrics(const SolutionBundle& system, const SolutionBundle& copies,
                        const JumpMeasure& nu, double dt, double p);

struct ChaosParams {
  std::vector<std::size_t> n_list;
  std::size_t reps = 20;
  double metric_p = 2.0;          // order of the reported error norms
  double terminal_perturb = 0.0;  // xi^{i,n} = xi^i + perturb / n
  double budget_seconds = std::numeric_limits<double>::infinity();
  Regime regime = Regime::chaos_y;  // smallness regime the scenario must pass
  double kappa = 0.0;               // for chaos_full
};

/// Runs the ladder: solve the limit once at `samples` Monte Carlo streams,
/// then per (n, rep) draw fresh streams, solve n limit copies at the
/// converged flow and the coupled n-system on the same streams, and record
/// the error metrics. Cells are seeded deterministically from (seed, n, rep).
ChaosReport run_chaos_experiment(const CoefficientSet& coeffs, const TimeGrid& grid,
                                 const JumpMeasure& nu, const RegressionSpec& reg,
                                 std::size_t samples, std::uint64_t seed,
                                 const ChaosParams& params, const PicardOptions& picard = {});

/// Empirical law-of-large-numbers table: per (n, rep), n fresh limit copies
/// are solved at the converged flow and sup-node W_p^p between their
/// empirical flow and the reference flow is recorded. The bound column is
/// 2^p times the p-th sup-norm moment of the reference paths.
struct LlnExperiment {
  DecayTable table;
  double worst_domination = 0.0;
  double worst_flatness = 0.0;
};

LlnExperiment lln_experiment(const CoefficientSet& coeffs, const TimeGrid& grid,
                             const JumpMeasure& nu, const RegressionSpec& reg,
                             std::size_t samples, std::uint64_t seed,
                             const std::vector<std::size_t>& n_list, std::size_t reps,
                             const PicardOptions& picard = {});

/// CSV with columns (n, rep, err_Y_supW, err_Y_Sp, err_Z, err_U, err_K, seconds).
void write_chaos_csv(const ChaosReport& report, const std::string& path);

/// JSON summary with per-n aggregates, the config hash and a provenance string.
void write_chaos_json(const ChaosReport& report, const std::string& config_hash,
                      const std::string& path);

}  // namespace mfr
