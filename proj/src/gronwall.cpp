#include "mfr/gronwall.hpp"

#include <algorithm>
#include <cmath>

#include "mfr/errors.hpp"

namespace mfr {

GronwallResult backward_gronwall(const std::vector<double>& g, const std::vector<double>& alpha,
                                 double c, double horizon, double tolerance) {
  if (g.size() != alpha.size() || g.size() < 2)
    throw ParameterError("backward_gronwall: grid functions must share a grid of >= 2 nodes");
  if (!(horizon > 0.0)) throw ParameterError("backward_gronwall: horizon must be > 0");
  if (!(c >= 0.0)) throw ParameterError("backward_gronwall: constant c must be >= 0");
  for (double a : alpha)
    if (!(a >= 0.0)) throw ParameterError("backward_gronwall: alpha must be >= 0");

  const std::size_t nodes = g.size();
  const double dt = horizon / static_cast<double>(nodes - 1);

  double gmax = 0.0, amax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  for (double a : alpha) amax = std::max(amax, a);
  GronwallResult out;
  out.tolerance =
      tolerance >= 0.0
          ? tolerance
          : 25.0 * (1.0 + gmax) * (1.0 + amax) * (1.0 + amax) * horizon * dt * dt;

  // suffix trapezoid integrals of alpha and alpha * g
  std::vector<double> int_alpha(nodes, 0.0), int_ag(nodes, 0.0);
  for (std::size_t k = nodes - 1; k-- > 0;) {
    int_alpha[k] = int_alpha[k + 1] + 0.5 * dt * (alpha[k] + alpha[k + 1]);
    int_ag[k] = int_ag[k + 1] + 0.5 * dt * (alpha[k] * g[k] + alpha[k + 1] * g[k + 1]);
  }

  out.bound.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) out.bound[k] = c * std::exp(int_alpha[k]);

  out.hypothesis_ok = true;
  bool bound_ok = true;
  for (std::size_t k = 0; k < nodes; ++k) {
    const bool hyp = g[k] >= 0.0 && g[k] <= c + int_ag[k] + out.tolerance;
    if (!hyp && out.hypothesis_ok) {
      out.hypothesis_ok = false;
      out.first_hypothesis_violation = static_cast<std::ptrdiff_t>(k);
    }
    if (hyp && g[k] > out.bound[k] + out.tolerance && bound_ok) {
      bound_ok = false;
      out.first_bound_violation = static_cast<std::ptrdiff_t>(k);
    }
  }
  out.satisfied = out.hypothesis_ok && bound_ok;
  return out;
}

}  // namespace mfr
