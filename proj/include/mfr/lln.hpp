#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfr/path_metrics.hpp"

namespace mfr {

struct DecayRow {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // 2^p times the p-th sup-norm moment of the reference
};

struct DecayTable {
  std::string coupling;  // which coupling was instrumented
  std::vector<DecayRow> rows;
};

/// CSV with columns (n, mean, stderr, bound).
void write_decay_csv(const DecayTable& table, const std::string& path);

/// Law-of-large-numbers diagnostic for path-space empirical measures: for
/// each n, estimates E[D_T^o(L^n, P)^p] by repeated subsampling from `pool`
/// against an equal-size subsample of `reference` (large-M proxy for P).
/// Two couplings are instrumented: "matched" (exact assignment for n <= 8,
/// rank coupling above, an upper bound of the optimal value, decaying with
/// n) and "product" (independent pairing, a non-decaying contrast).
struct LlnDiagnostic {
  DecayTable matched;
  DecayTable product;
};

LlnDiagnostic lln_diagnostic(const std::vector<PathSample>& pool,
                             const std::vector<PathSample>& reference, double p,
                             const std::vector<std::size_t>& n_list, std::size_t reps,
                             std::uint64_t seed, const AlignmentSearch& search = {});

}  // namespace mfr
