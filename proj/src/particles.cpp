#include "mfr/particles.hpp"

#include <cmath>
#include <cstdio>

#include "mfr/errors.hpp"

namespace mfr {

namespace {

struct ScalarStep {
  double value = 0.0;
  double dk = 0.0;
  std::size_t iterations = 0;
};

// implicit driver step followed by reflection, at a fixed measure
ScalarStep scalar_step(const CoefficientSet& coeffs, const MarkovState& s, double base, double z,
                       const std::vector<double>& u, const EmpiricalMeasure& mu, double dt,
                       const SolveOptions& opts) {
  ScalarStep out;
  double y = base;
  for (std::size_t it = 0;; ++it) {
    if (it >= opts.max_inner) throw DivergedError("particle implicit step did not converge", {});
    const double next = base + coeffs.driver(s, y, z, u, mu) * dt;
    const double change = std::abs(next - y);
    y = next;
    ++out.iterations;
    if (change <= opts.tol_inner) break;
  }
  const double h = coeffs.obstacle(s, y, mu);
  if (y < h) {
    double root = y;
    for (std::size_t it = 0;; ++it) {
      if (it >= opts.max_inner) throw DivergedError("particle reflection did not converge", {});
      const double next = coeffs.obstacle(s, root, mu);
      const double change = std::abs(next - root);
      root = next;
      if (change <= opts.tol_inner) break;
    }
    out.dk = root - y;
    y = root;
  }
  out.value = y;
  return out;
}

}  // namespace

SolutionBundle solve_particle_system(const NoiseBundle& noise, const CoefficientSet& coeffs,
                                     const RegressionSpec& reg,
                                     const std::vector<double>& terminal,
                                     const ParticleOptions& opts) {
  const std::size_t n = noise.particles();
  const std::size_t m = noise.jumps().mark_count();
  const std::size_t steps = noise.grid().steps();
  const double dt = noise.grid().dt();
  if (terminal.size() != n) throw ParameterError("solve_particle_system: terminal count mismatch");
  if (coeffs.lipschitz_f * dt >= 1.0)
    throw RefusedError("solve_particle_system: C_f * dt >= 1");
  if (coeffs.gamma1 >= 1.0) throw RefusedError("solve_particle_system: gamma1 >= 1");

  SolutionBundle b(n, steps + 1, m);
  // forward pass: Markov states
  for (std::size_t i = 0; i < n; ++i) {
    MarkovState s;
    s.t = 0.0;
    s.brownian = 0.0;
    s.compensated.assign(m, 0.0);
    b.state(i, 0) = s;
    for (std::size_t k = 1; k <= steps; ++k) {
      s.t = noise.grid().node(k);
      s.brownian += noise.brownian_increment(i, k - 1);
      for (std::size_t j = 0; j < m; ++j)
        s.compensated[j] += noise.compensated_increment(i, k - 1, j);
      b.state(i, k) = s;
    }
  }

  // terminal admissibility against the terminal empirical measure
  {
    EmpiricalMeasure mu_T((std::vector<double>(terminal)));
    for (std::size_t i = 0; i < n; ++i) {
      const double h = coeffs.obstacle(b.state(i, steps), terminal[i], mu_T);
      if (terminal[i] < h - 1e-12)
        throw RefusedError("solve_particle_system: terminal value below the obstacle");
    }
  }
  for (std::size_t i = 0; i < n; ++i) b.y(i, steps) = terminal[i];

  const std::size_t vars = 1 + m;
  std::vector<double> states(n * vars);
  std::vector<double> target(n);
  std::vector<double> y_vec(n), y_next(n);

  for (std::size_t k = steps; k-- > 0;) {
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

    // synchronous sweeps of the coupled map
    y_vec = cont.fitted;
    bool converged = false;
    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      EmpiricalMeasure mu_sweep((std::vector<double>(y_vec)));
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto u_row = b.u_row(i, k);
        const auto step = scalar_step(coeffs, b.state(i, k), cont.fitted[i], b.z(i, k), u_row,
                                      mu_sweep, dt, opts.inner);
        b.max_inner_iterations = std::max(b.max_inner_iterations, step.iterations);
        y_next[i] = step.value;
        worst = std::max(worst, std::abs(step.value - y_vec[i]));
      }
      std::swap(y_vec, y_next);
      if (worst <= opts.tol_inner_vec) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw DivergedError("solve_particle_system: coupled node sweep exceeded its cap", {});

    // final pass at the converged measure pins Y and dK consistently
    EmpiricalMeasure mu_k((std::vector<double>(y_vec)));
    for (std::size_t i = 0; i < n; ++i) {
      const auto u_row = b.u_row(i, k);
      const auto step =
          scalar_step(coeffs, b.state(i, k), cont.fitted[i], b.z(i, k), u_row, mu_k, dt, opts.inner);
      b.y(i, k) = step.value;
      b.dk(i, k) = step.dk;
    }
  }
  return b;
}

std::vector<OffDiagonalEntry> offdiagonal_diagnostic(const SolutionBundle& bundle,
                                                     const NoiseBundle& noise,
                                                     std::size_t max_particles) {
  const std::size_t n = std::min(bundle.particles(), max_particles);
  const std::size_t steps = bundle.nodes() - 1;
  std::vector<OffDiagonalEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < steps; ++k) {
        const double dy = bundle.y(i, k + 1) - bundle.y(i, k);
        const double db = noise.brownian_increment(j, k);
        num += dy * db;
        den += db * db;
      }
      out.push_back({i, j, den > 0.0 ? std::abs(num / den) : 0.0});
    }
  }
  return out;
}

void write_offdiagonal_csv(const std::vector<OffDiagonalEntry>& entries, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ParameterError("write_offdiagonal_csv: cannot open " + path);
  std::fprintf(f, "i,j,coefficient\n");
  for (const auto& e : entries) std::fprintf(f, "%zu,%zu,%.17g\n", e.row, e.col, e.coefficient);
  std::fclose(f);
}

}  // namespace mfr
