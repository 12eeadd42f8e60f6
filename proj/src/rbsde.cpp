#include "mfr/rbsde.hpp"

#include <cmath>

#include "mfr/errors.hpp"

namespace mfr {

namespace {

void fill_states(SolutionBundle& b, const NoiseBundle& noise, std::size_t last_node) {
  const std::size_t m = noise.jumps().mark_count();
  for (std::size_t i = 0; i < b.particles(); ++i) {
    MarkovState s;
    s.t = 0.0;
    s.brownian = 0.0;
    s.compensated.assign(m, 0.0);
    b.state(i, 0) = s;
    for (std::size_t k = 1; k <= last_node; ++k) {
      s.t = noise.grid().node(k);
      s.brownian += noise.brownian_increment(i, k - 1);
      for (std::size_t j = 0; j < m; ++j) s.compensated[j] += noise.compensated_increment(i, k - 1, j);
      b.state(i, k) = s;
    }
  }
}

struct InnerResult {
  double value = 0.0;
  std::size_t iterations = 0;
};

// y = base + f(t, y, z, u, mu) * dt, solved by successive substitution.
InnerResult implicit_driver_step(const CoefficientSet& coeffs, const MarkovState& s, double base,
                                 double z, const std::vector<double>& u,
                                 const EmpiricalMeasure& mu, double dt, const SolveOptions& opts) {
  InnerResult r;
  r.value = base;
  for (std::size_t it = 0; it < opts.max_inner; ++it) {
    const double next = base + coeffs.driver(s, r.value, z, u, mu) * dt;
    const double change = std::abs(next - r.value);
    r.value = next;
    ++r.iterations;
    if (change <= opts.tol_inner) return r;
  }
  throw DivergedError("implicit driver step did not converge", {});
}

// root of y = h(t, y, mu); unique and attracting for gamma1 < 1
double reflect_root(const CoefficientSet& coeffs, const MarkovState& s, double start,
                    const EmpiricalMeasure& mu, const SolveOptions& opts) {
  double y = start;
  for (std::size_t it = 0; it < opts.max_inner; ++it) {
    const double next = coeffs.obstacle(s, y, mu);
    const double change = std::abs(next - y);
    y = next;
    if (change <= opts.tol_inner) return y;
  }
  throw DivergedError("obstacle fixed point did not converge", {});
}

SolutionBundle backward_solve(const NoiseBundle& noise, const CoefficientSet& coeffs,
                              const MeasureFlow& mu, const RegressionSpec& reg,
                              std::size_t terminal_node, const std::vector<double>& terminal,
                              bool reflect, const SolveOptions& opts) {
  const std::size_t n = noise.particles();
  const std::size_t m = noise.jumps().mark_count();
  const double dt = noise.grid().dt();
  if (terminal_node == 0 || terminal_node > noise.grid().steps())
    throw ParameterError("backward solve: terminal node out of range");
  if (terminal.size() != n) throw ParameterError("backward solve: terminal value count mismatch");
  if (mu.nodes() < terminal_node + 1)
    throw ParameterError("backward solve: measure flow undefined at some nodes");
  if (coeffs.lipschitz_f * dt >= 1.0)
    throw RefusedError("backward solve: C_f * dt >= 1, implicit step may diverge");
  if (reflect && coeffs.gamma1 >= 1.0)
    throw RefusedError("backward solve: gamma1 >= 1, reflection fixed point not contractive");

  SolutionBundle b(n, terminal_node + 1, m);
  fill_states(b, noise, terminal_node);
  for (std::size_t i = 0; i < n; ++i) b.y(i, terminal_node) = terminal[i];

  const std::size_t vars = 1 + m;
  std::vector<double> states(n * vars);
  std::vector<double> target(n);

  for (std::size_t k = terminal_node; k-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      const MarkovState& s = b.state(i, k);
      states[i * vars] = s.brownian;
      for (std::size_t j = 0; j < m; ++j) states[i * vars + 1 + j] = s.compensated[j];
    }
    NodeRegression regression(states, n, vars, reg);

    for (std::size_t i = 0; i < n; ++i) target[i] = b.y(i, k + 1);
    auto cont = regression.fit(target);
    if (cont.warning) ++b.regression_warnings;

    for (std::size_t i = 0; i < n; ++i) target[i] = b.y(i, k + 1) * noise.brownian_increment(i, k);
    auto zfit = regression.fit(target);
    if (zfit.warning) ++b.regression_warnings;
    for (std::size_t i = 0; i < n; ++i) b.z(i, k) = zfit.fitted[i] / dt;

    for (std::size_t j = 0; j < m; ++j) {
      const double denom = noise.jumps().intensity(j) * dt;
      for (std::size_t i = 0; i < n; ++i)
        target[i] = b.y(i, k + 1) * noise.compensated_increment(i, k, j);
      auto ufit = regression.fit(target);
      if (ufit.warning) ++b.regression_warnings;
      for (std::size_t i = 0; i < n; ++i) b.u(i, k, j) = ufit.fitted[i] / denom;
    }

    const EmpiricalMeasure& mu_k = mu.at(k);
    for (std::size_t i = 0; i < n; ++i) {
      const MarkovState& s = b.state(i, k);
      const auto u_row = b.u_row(i, k);
      const auto inner =
          implicit_driver_step(coeffs, s, cont.fitted[i], b.z(i, k), u_row, mu_k, dt, opts);
      b.max_inner_iterations = std::max(b.max_inner_iterations, inner.iterations);
      double yk = inner.value;
      double dk = 0.0;
      if (reflect) {
        const double h = coeffs.obstacle(s, yk, mu_k);
        if (yk < h) {
          const double root = reflect_root(coeffs, s, yk, mu_k, opts);
          dk = root - yk;
          yk = root;
        }
      }
      b.y(i, k) = yk;
      b.dk(i, k) = dk;
    }
  }
  return b;
}

}  // namespace

SolutionBundle solve_rbsde(const NoiseBundle& noise, const CoefficientSet& coeffs,
                           const MeasureFlow& mu, const RegressionSpec& reg,
                           const SolveOptions& opts) {
  return backward_solve(noise, coeffs, mu, reg, noise.grid().steps(),
                        terminal_values(noise, coeffs), /*reflect=*/true, opts);
}

SolutionBundle solve_rbsde_partial(const NoiseBundle& noise, const CoefficientSet& coeffs,
                                   const MeasureFlow& mu, const RegressionSpec& reg,
                                   std::size_t terminal_node,
                                   const std::vector<double>& terminal_vals,
                                   const SolveOptions& opts) {
  return backward_solve(noise, coeffs, mu, reg, terminal_node, terminal_vals, /*reflect=*/true,
                        opts);
}

SolutionBundle nonlinear_expectation(const NoiseBundle& noise, const CoefficientSet& coeffs,
                                     const MeasureFlow& mu, const RegressionSpec& reg,
                                     std::size_t terminal_node,
                                     const std::vector<double>& terminal_vals,
                                     const SolveOptions& opts) {
  return backward_solve(noise, coeffs, mu, reg, terminal_node, terminal_vals, /*reflect=*/false,
                        opts);
}

double flatness_residual(const SolutionBundle& b, const CoefficientSet& coeffs,
                         const MeasureFlow& mu) {
  double total = 0.0;
  for (std::size_t i = 0; i < b.particles(); ++i) {
    for (std::size_t k = 0; k < b.nodes(); ++k) {
      const double yv = b.y(i, k);
      total += (yv - coeffs.obstacle(b.state(i, k), yv, mu.at(k))) * b.dk(i, k);
    }
  }
  return total / static_cast<double>(b.particles());
}

std::vector<double> terminal_values(const NoiseBundle& noise, const CoefficientSet& coeffs) {
  const std::size_t n = noise.particles();
  const std::size_t m = noise.jumps().mark_count();
  const std::size_t last = noise.grid().steps();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    MarkovState s;
    s.t = noise.grid().horizon();
    s.brownian = noise.brownian_at(i, last);
    s.compensated.resize(m);
    for (std::size_t j = 0; j < m; ++j) s.compensated[j] = noise.compensated_at(i, last, j);
    out[i] = coeffs.terminal(s);
  }
  return out;
}

}  // namespace mfr
