#include "mfr/path_metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "mfr/errors.hpp"

namespace mfr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_grid(const PathSample& x, const PathSample& y, const char* who) {
  if (x.nodes() != y.nodes() || x.nodes() < 2)
    throw ParameterError(std::string(who) + ": paths on different grids");
}

// sup_t |x(t) - y(lambda(t))| over one matched block (i0,j0) -> (i1,j1),
// lambda linear. The merged jump order inside the block is resolved with
// integer arithmetic: the x-jump at offset u and the y-jump at offset v*a/b
// compare as u*b vs v*a.
double block_mismatch(const PathSample& x, const PathSample& y, std::size_t i0, std::size_t j0,
                      std::size_t i1, std::size_t j1) {
  const std::size_t a = i1 - i0, b = j1 - j0;
  std::size_t ix = 0, jy = 0;
  double worst = std::abs(x.values[i0] - y.values[j0]);
  while (ix + 1 < a || jy + 1 < b) {
    const unsigned long long nx = (ix + 1 < a) ? (ix + 1) * b : ~0ull;
    const unsigned long long ny = (jy + 1 < b) ? (jy + 1) * a : ~0ull;
    if (nx <= ny) ++ix;
    if (ny <= nx) ++jy;
    worst = std::max(worst, std::abs(x.values[i0 + ix] - y.values[j0 + jy]));
  }
  return worst;
}

enum class Penalty { log_slope, deviation };

double alignment_dp(const PathSample& x, const PathSample& y, Penalty kind, double dt,
                    AlignmentSearch search) {
  const std::size_t n = x.steps();
  std::size_t shift = search.max_shift, block = search.max_block;
  if (shift == 0) shift = n <= 16 ? n : 6;
  if (block == 0) block = n <= 16 ? n : 6;
  shift = std::min(shift, n);
  block = std::min(block, n);

  // best[i][j]: cost of an optimal partial alignment ending with matched
  // pair (i, j); stored banded over |i - j| <= shift.
  const std::size_t width = 2 * shift + 1;
  std::vector<double> best((n + 1) * width, kInf);
  auto slot = [&](std::size_t i, std::size_t j) -> double& {
    return best[i * width + (j + shift - i)];
  };
  auto in_band = [&](std::size_t i, std::size_t j) {
    return (i <= j ? j - i : i - j) <= shift;
  };
  slot(0, 0) = 0.0;

  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t j_lo = i > shift ? i - shift : 1;
    const std::size_t j_hi = std::min(n, i + shift);
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      if ((i == n) != (j == n)) continue;  // endpoints matched together only
      double acc = kInf;
      const std::size_t a_max = std::min(block, i);
      for (std::size_t a = 1; a <= a_max; ++a) {
        const std::size_t b_max = std::min(block, j);
        for (std::size_t b = 1; b <= b_max; ++b) {
          const std::size_t pi = i - a, pj = j - b;
          if (!in_band(pi, pj)) continue;
          const double prior = slot(pi, pj);
          if (!(prior < acc)) continue;
          const double mism = block_mismatch(x, y, pi, pj, i, j);
          double penalty;
          if (kind == Penalty::log_slope) {
            penalty = std::abs(std::log(static_cast<double>(b) / static_cast<double>(a)));
          } else {
            const double di = i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
            penalty = di * dt;
          }
          const double cost = std::max(prior, std::max(mism, penalty));
          acc = std::min(acc, cost);
        }
      }
      slot(i, j) = acc;
    }
  }
  // x(T) and y(T) are always compared at the fixed right endpoint.
  const double end = std::abs(x.values[n] - y.values[n]);
  return std::max(slot(n, n), end);
}

}  // namespace

double PathSample::sup_abs_to(std::size_t k) const {
  double s = 0.0;
  for (std::size_t i = 0; i <= k && i < values.size(); ++i) s = std::max(s, std::abs(values[i]));
  return s;
}

double sup_distance(const PathSample& x, const PathSample& y, std::size_t k) {
  require_same_grid(x, y, "sup_distance");
  if (k >= x.nodes()) throw ParameterError("sup_distance: node index out of range");
  double s = 0.0;
  for (std::size_t i = 0; i <= k; ++i) s = std::max(s, std::abs(x.values[i] - y.values[i]));
  return s;
}

double skorohod_do(const PathSample& x, const PathSample& y, const AlignmentSearch& search) {
  require_same_grid(x, y, "skorohod_do");
  return alignment_dp(x, y, Penalty::log_slope, 0.0, search);
}

double skorohod_d(const PathSample& x, const PathSample& y, double horizon,
                  const AlignmentSearch& search) {
  require_same_grid(x, y, "skorohod_d");
  if (!(horizon > 0.0)) throw ParameterError("skorohod_d: horizon must be > 0");
  const double dt = horizon / static_cast<double>(x.steps());
  return alignment_dp(x, y, Penalty::deviation, dt, search);
}

double modulus_wprime(const PathSample& x, double horizon, double delta) {
  if (!(horizon > 0.0)) throw ParameterError("modulus_wprime: horizon must be > 0");
  if (!(delta > 0.0 && delta < horizon))
    throw ParameterError("modulus_wprime: delta outside (0, horizon)");
  const std::size_t n = x.steps();
  const double dt = horizon / static_cast<double>(n);
  // g[k]: best max-oscillation over partitions of [0, t_k) with every
  // interval strictly longer than delta.
  std::vector<double> g(n + 1, kInf);
  g[0] = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double lo = x.values[k - 1], hi = x.values[k - 1];
    for (std::size_t j = k; j-- > 0;) {
      lo = std::min(lo, x.values[j]);
      hi = std::max(hi, x.values[j]);
      if (static_cast<double>(k - j) * dt > delta && g[j] < kInf)
        g[k] = std::min(g[k], std::max(g[j], hi - lo));
    }
  }
  return g[n];
}

namespace {

PathDistance empirical_path_distance(const std::vector<PathSample>& ps,
                                     const std::vector<PathSample>& qs, double p,
                                     const std::function<double(const PathSample&, const PathSample&)>& cost) {
  if (ps.size() != qs.size() || ps.empty())
    throw ParameterError("path distance: sample counts differ or empty");
  if (!(p >= 1.0)) throw ParameterError("path distance: order p must be >= 1");
  const std::size_t m = ps.size();
  PathDistance out;
  if (m <= 8) {
    // exact optimal assignment over all couplings (bitmask DP)
    std::vector<double> c(m * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) c[i * m + j] = std::pow(cost(ps[i], qs[j]), p);
    const std::size_t full = std::size_t{1} << m;
    std::vector<double> f(full, kInf);
    f[0] = 0.0;
    for (std::size_t mask = 0; mask + 1 < full; ++mask) {
      if (f[mask] == kInf) continue;
      const std::size_t i = static_cast<std::size_t>(std::popcount(mask));
      for (std::size_t j = 0; j < m; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const std::size_t next = mask | (std::size_t{1} << j);
        f[next] = std::min(f[next], f[mask] + c[i * m + j]);
      }
    }
    out.value = std::pow(f[full - 1] / static_cast<double>(m), 1.0 / p);
    out.exact = true;
    return out;
  }
  // heuristic: match ranks after sorting by terminal value; upper bound
  auto rank_by_terminal = [](const std::vector<PathSample>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return v[a].values.back() < v[b].values.back();
    });
    return idx;
  };
  const auto ri = rank_by_terminal(ps);
  const auto rj = rank_by_terminal(qs);
  double s = 0.0;
  for (std::size_t r = 0; r < m; ++r) s += std::pow(cost(ps[ri[r]], qs[rj[r]]), p);
  out.value = std::pow(s / static_cast<double>(m), 1.0 / p);
  out.exact = false;
  return out;
}

}  // namespace

PathDistance path_wasserstein_dt(const std::vector<PathSample>& ps,
                                 const std::vector<PathSample>& qs, double p, std::size_t node_k) {
  if (!ps.empty() && node_k >= ps[0].nodes())
    throw ParameterError("path_wasserstein_dt: node index out of range");
  return empirical_path_distance(
      ps, qs, p, [node_k](const PathSample& a, const PathSample& b) {
        return sup_distance(a, b, node_k);
      });
}

PathDistance path_wasserstein_skorohod(const std::vector<PathSample>& ps,
                                       const std::vector<PathSample>& qs, double p,
                                       const AlignmentSearch& search) {
  return empirical_path_distance(ps, qs, p, [&search](const PathSample& a, const PathSample& b) {
    return skorohod_do(a, b, search);
  });
}

}  // namespace mfr
