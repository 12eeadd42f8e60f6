#pragma once

#include <cstddef>
#include <vector>

namespace mfr {

/// A cadlag path sampled on a uniform grid: x(t) = values[k] on [t_k, t_{k+1})
/// and x(T) = values[N]. values.size() == N + 1.
struct PathSample {
  std::vector<double> values;

  std::size_t nodes() const { return values.size(); }
  std::size_t steps() const { return values.size() - 1; }
  /// sup_{s <= t_k} |x(s)|
  double sup_abs_to(std::size_t k) const;
};

/// sup_{s <= t_k} |x(s) - y(s)| for paths on the same grid.
double sup_distance(const PathSample& x, const PathSample& y, std::size_t k);

/// Search controls for the time-change alignment lattice. Alignments are
/// monotone matchings of grid nodes with endpoints fixed; max_shift bounds
/// |i - j| along the matching and max_block bounds the node gap between
/// consecutive matched pairs. Defaults give the exact lattice optimum on
/// small grids and a banded search on large ones.
struct AlignmentSearch {
  std::size_t max_shift = 0;  // 0 = automatic
  std::size_t max_block = 0;  // 0 = automatic
};

/// Skorohod distance d^o approximated over grid-node alignments: minimizes
/// max(||lambda||^o, sup|x - y o lambda|) where ||.||^o is the max absolute
/// log slope of the piecewise-linear time change. Always in [0, sup-distance],
/// 0 iff the paths agree on the grid. The restriction to node alignments is
/// an approximation from above of the infimum over all time changes.
double skorohod_do(const PathSample& x, const PathSample& y, const AlignmentSearch& search = {});

/// Companion metric with time-change penalty sup|lambda(t) - t| instead of
/// the log-slope norm, over the same alignment lattice.
double skorohod_d(const PathSample& x, const PathSample& y, double horizon,
                  const AlignmentSearch& search = {});

/// Modulus w'_x(delta): min over partitions of [0,T) into intervals longer
/// than delta, cut at grid nodes, of the max oscillation per interval.
double modulus_wprime(const PathSample& x, double horizon, double delta);

struct PathDistance {
  double value = 0.0;
  bool exact = true;  // false = heuristic coupling, value is an upper bound
};

/// Empirical p-Wasserstein distance between two equal-size sets of paths
/// under the cost |x - y|_{t_k}^p. Exact optimal assignment for sample
/// counts <= 8; larger sets use the sorted-by-terminal-value coupling and
/// report an upper bound.
PathDistance path_wasserstein_dt(const std::vector<PathSample>& ps,
                                 const std::vector<PathSample>& qs, double p, std::size_t node_k);

/// Same construction with cost d^o(x, y)^p (used by the path-space LLN
/// diagnostics).
PathDistance path_wasserstein_skorohod(const std::vector<PathSample>& ps,
                                       const std::vector<PathSample>& qs, double p,
                                       const AlignmentSearch& search = {});

}  // namespace mfr
