#include "mfr/apriori.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfr/errors.hpp"
#include "mfr/smallness.hpp"

namespace mfr {

AprioriReport apriori_check(const SolutionBundle& run1, const CoefficientSet& coeffs1,
                            const MeasureFlow& mu1, const SolutionBundle& run2,
                            const CoefficientSet& coeffs2, const MeasureFlow& mu2,
                            const NoiseBundle& noise, double p,
                            const std::vector<std::size_t>& probe_nodes,
                            const RegressionSpec& reg) {
  if (run1.nodes() != run2.nodes() || run1.particles() != run2.particles())
    throw ParameterError("apriori_check: runs on mismatched grids");
  if (mu1.nodes() < run1.nodes() || mu2.nodes() < run2.nodes())
    throw ParameterError("apriori_check: measure flows shorter than runs");
  const std::size_t n = run1.particles();
  const std::size_t tau = run1.nodes() - 1;
  const double dt = noise.grid().dt();

  const auto be = select_beta_eta(std::max(coeffs1.lipschitz_f, coeffs2.lipschitz_f));
  AprioriReport report;
  report.eta = be.eta;
  report.beta = be.beta;

  // suffix integral of |e^{beta s} dF_s|^2 per sample, dF along run 2
  std::vector<std::vector<double>> suffix(n, std::vector<double>(tau + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = tau; k-- > 0;) {
      const MarkovState& s = run2.state(i, k);
      const double y2 = run2.y(i, k);
      const double z2 = run2.z(i, k);
      const auto u2 = run2.u_row(i, k);
      const double df = coeffs1.driver(s, y2, z2, u2, mu1.at(k)) -
                        coeffs2.driver(s, y2, z2, u2, mu2.at(k));
      const double w = std::exp(be.beta * s.t) * df;
      suffix[i][k] = suffix[i][k + 1] + w * w * dt;
    }
  }

  const double t_tau = noise.grid().node(tau);
  std::vector<double> xi_term(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dxi = run1.y(i, tau) - run2.y(i, tau);
    xi_term[i] = std::pow(std::abs(std::exp(be.beta * t_tau) * dxi), p);
  }

  const std::size_t m = noise.jumps().mark_count();
  const std::size_t vars = 1 + m;
  std::vector<double> states(n * vars);
  std::vector<double> target(n);
  const double front = std::pow(2.0, p / 2.0 - 1.0);

  for (std::size_t k : probe_nodes) {
    if (k > tau) throw ParameterError("apriori_check: probe node out of range");
    for (std::size_t i = 0; i < n; ++i) {
      const MarkovState& s = run1.state(i, k);
      states[i * vars] = s.brownian;
      for (std::size_t j = 0; j < m; ++j) states[i * vars + 1 + j] = s.compensated[j];
    }
    NodeRegression regression(states, n, vars, reg);
    auto exi = regression.fit(xi_term);
    for (std::size_t i = 0; i < n; ++i) target[i] = std::pow(suffix[i][k], p / 2.0);
    auto eint = regression.fit(target);

    AprioriProbe probe;
    probe.node = k;
    probe.min_slack = std::numeric_limits<double>::infinity();
    const double tk = noise.grid().node(k);
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dy = run1.y(i, k) - run2.y(i, k);
      const double lhs = std::pow(std::abs(std::exp(be.beta * tk) * dy), p);
      const double rhs = front * (exi.fitted[i] + std::pow(be.eta, p) * eint.fitted[i]);
      const double slack = rhs - lhs;
      mean += slack;
      sq += slack * slack;
      probe.min_slack = std::min(probe.min_slack, slack);
    }
    mean /= static_cast<double>(n);
    probe.mean_slack = mean;
    const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
    probe.stderr_slack = std::sqrt(var / static_cast<double>(n));
    report.probes.push_back(probe);
  }
  return report;
}

}  // namespace mfr
