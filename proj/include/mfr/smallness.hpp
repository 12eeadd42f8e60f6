#pragma once

namespace mfr {

/// Contraction regimes for the Lipschitz constants of the obstacle.
/// Each regime bounds gamma1^p + gamma2^p by a strict threshold:
///   existence:   2^(2 - 3p/2)
///   chaos_y:     2^(2 - 5p/2)
///   chaos_full:  ((p - kappa)/(2p))^(p/kappa) / 2^(5p/2 - 2), for 2 <= kappa < p
enum class Regime { existence, chaos_y, chaos_full };

struct SmallnessVerdict {
  bool pass = false;
  double margin = 0.0;     // threshold - (gamma1^p + gamma2^p)
  double threshold = 0.0;  // bound on gamma1^p + gamma2^p for the regime
};

/// Threshold on gamma1^p + gamma2^p for the given regime.
double smallness_threshold(double p, Regime regime, double kappa = 0.0);

/// Strict-inequality verdict for the selected regime.
SmallnessVerdict check_smallness(double p, double gamma1, double gamma2, Regime regime,
                                 double kappa = 0.0);

/// Weight pair (eta, beta) with eta <= 1/C_f^2 and beta >= 2 C_f + 3/eta.
/// Returns eta = min(1, 1/C_f^2) (eta = 1 when C_f = 0) and beta = 2 C_f + 3/eta.
struct BetaEta {
  double eta = 1.0;
  double beta = 3.0;
};
BetaEta select_beta_eta(double lipschitz_f);

}  // namespace mfr
