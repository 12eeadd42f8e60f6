#include "mfr/smallness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfr/errors.hpp"

namespace mfr {

double smallness_threshold(double p, Regime regime, double kappa) {
  if (!(p >= 2.0)) throw ParameterError("smallness: moment order p must be >= 2");
  switch (regime) {
    case Regime::existence:
      return std::pow(2.0, 2.0 - 1.5 * p);
    case Regime::chaos_y:
      return std::pow(2.0, 2.0 - 2.5 * p);
    case Regime::chaos_full: {
      if (!(kappa >= 2.0 && kappa < p))
        throw ParameterError("smallness: chaos_full needs 2 <= kappa < p");
      const double base = (p - kappa) / (2.0 * p);
      return std::pow(base, p / kappa) / std::pow(2.0, 2.5 * p - 2.0);
    }
  }
  throw ParameterError("smallness: unknown regime");
}

SmallnessVerdict check_smallness(double p, double gamma1, double gamma2, Regime regime,
                                 double kappa) {
  if (!(gamma1 >= 0.0 && gamma2 >= 0.0))
    throw ParameterError("smallness: Lipschitz constants must be >= 0");
  SmallnessVerdict v;
  v.threshold = smallness_threshold(p, regime, kappa);
  const double sum = std::pow(gamma1, p) + std::pow(gamma2, p);
  v.margin = v.threshold - sum;
  v.pass = sum < v.threshold;
  return v;
}

BetaEta select_beta_eta(double lipschitz_f) {
  if (!(lipschitz_f >= 0.0)) throw ParameterError("select_beta_eta: C_f must be >= 0");
  BetaEta be;
  be.eta = lipschitz_f == 0.0 ? 1.0 : std::min(1.0, 1.0 / (lipschitz_f * lipschitz_f));
  // both constraints must hold under floating-point evaluation, not just in
  // exact arithmetic; nudge by ulps where rounding landed on the wrong side
  while (be.eta * lipschitz_f * lipschitz_f > 1.0)
    be.eta = std::nextafter(be.eta, 0.0);
  be.beta = 2.0 * lipschitz_f + 3.0 / be.eta;
  while (be.beta - 2.0 * lipschitz_f - 3.0 / be.eta < 0.0)
    be.beta = std::nextafter(be.beta, std::numeric_limits<double>::infinity());
  return be;
}

}  // namespace mfr
