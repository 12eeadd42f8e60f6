#include "mfr/wasserstein.hpp"

#include <algorithm>
#include <cmath>

#include "mfr/errors.hpp"

namespace mfr {

namespace {

void require_sorted(std::span<const double> a, const char* who) {
  if (!std::is_sorted(a.begin(), a.end())) throw ParameterError(std::string(who) + ": samples not sorted");
}

}  // namespace

double wasserstein_p(std::span<const double> a_sorted, std::span<const double> b_sorted, double p) {
  if (a_sorted.size() != b_sorted.size())
    throw ParameterError("wasserstein_p: sample counts differ (resampling is the caller's job)");
  if (a_sorted.empty()) throw ParameterError("wasserstein_p: empty samples");
  if (!(p >= 1.0)) throw ParameterError("wasserstein_p: order p must be >= 1");
  require_sorted(a_sorted, "wasserstein_p");
  require_sorted(b_sorted, "wasserstein_p");
  double s = 0.0;
  for (std::size_t i = 0; i < a_sorted.size(); ++i)
    s += std::pow(std::abs(a_sorted[i] - b_sorted[i]), p);
  return std::pow(s / static_cast<double>(a_sorted.size()), 1.0 / p);
}

double wasserstein_p_general(std::span<const double> a_sorted, std::span<const double> b_sorted,
                             double p) {
  if (a_sorted.empty() || b_sorted.empty()) throw ParameterError("wasserstein_p_general: empty samples");
  if (!(p >= 1.0)) throw ParameterError("wasserstein_p_general: order p must be >= 1");
  if (a_sorted.size() == b_sorted.size()) return wasserstein_p(a_sorted, b_sorted, p);
  require_sorted(a_sorted, "wasserstein_p_general");
  require_sorted(b_sorted, "wasserstein_p_general");
  // Integrate |F_a^{-1}(u) - F_b^{-1}(u)|^p over u in (0,1); the quantile
  // functions are step functions with breakpoints i/n and j/m.
  const std::size_t n = a_sorted.size(), m = b_sorted.size();
  std::size_t i = 0, j = 0;
  double u = 0.0, s = 0.0;
  while (i < n && j < m) {
    const double next_a = static_cast<double>(i + 1) / static_cast<double>(n);
    const double next_b = static_cast<double>(j + 1) / static_cast<double>(m);
    const double next = std::min(next_a, next_b);
    s += std::pow(std::abs(a_sorted[i] - b_sorted[j]), p) * (next - u);
    u = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return std::pow(s, 1.0 / p);
}

double wasserstein_p(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  return wasserstein_p(a.view(), b.view(), p);
}

double sup_time_wasserstein(const MeasureFlow& a, const MeasureFlow& b, double p) {
  if (a.nodes() != b.nodes()) throw ParameterError("sup_time_wasserstein: flows on different grids");
  double best = 0.0;
  for (std::size_t k = 0; k < a.nodes(); ++k)
    best = std::max(best, wasserstein_p(a.at(k), b.at(k), p));
  return best;
}

}  // namespace mfr
