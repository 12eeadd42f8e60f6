#include "mfr/meanfield.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "mfr/errors.hpp"
#include "mfr/smallness.hpp"
#include "mfr/wasserstein.hpp"

namespace mfr {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> band_deltas(const std::vector<PicardStep>& trace, std::size_t band) {
  std::vector<double> d;
  for (const auto& s : trace)
    if (s.band == band) d.push_back(s.delta);
  return d;
}

}  // namespace

MeanFieldSolution solve_meanfield(const CoefficientSet& coeffs, const TimeGrid& grid,
                                  const JumpMeasure& nu, std::size_t samples,
                                  const RegressionSpec& reg, std::uint64_t seed,
                                  const PicardOptions& opts) {
  const auto verdict = check_smallness(coeffs.p, coeffs.gamma1, coeffs.gamma2, Regime::existence);
  if (!verdict.pass && !opts.allow_unproven)
    throw RefusedError("solve_meanfield: smallness condition fails (margin " +
                       std::to_string(verdict.margin) + "); set allow_unproven to override");

  const auto noise = simulate_noise(grid, nu, samples, seed);
  const std::size_t n_nodes = grid.nodes();
  const auto t0 = std::chrono::steady_clock::now();

  MeanFieldSolution out;

  if (opts.mode == PicardOptions::Mode::global) {
    MeasureFlow flow = MeasureFlow::point_mass(0.0, n_nodes, samples);
    for (std::size_t r = 0; r < opts.max_iter; ++r) {
      auto bundle = solve_rbsde(noise, coeffs, flow, reg, opts.inner);
      auto next = bundle.empirical_flow();
      const double delta = sup_time_wasserstein(next, flow, coeffs.p);
      out.trace.push_back({r, 0, delta, seconds_since(t0)});
      flow = std::move(next);
      if (delta < opts.tol_picard) {
        out.bundle = std::move(bundle);
        out.flow = std::move(flow);
        return out;
      }
    }
    throw DivergedError("solve_meanfield: Picard iteration exceeded max_iter",
                        band_deltas(out.trace, 0));
  }

  // interval mode: band width from the contraction estimate
  const double gsum = std::pow(coeffs.gamma1, coeffs.p) + std::pow(coeffs.gamma2, coeffs.p);
  const double margin = 1.0 - std::pow(2.0, 1.5 * coeffs.p - 1.0) * gsum;
  const auto be = select_beta_eta(coeffs.lipschitz_f);
  double width = grid.horizon();
  if (coeffs.lipschitz_f > 0.0) {
    if (margin <= 0.0)
      throw RefusedError("solve_meanfield: interval construction has no admissible band width "
                         "for these Lipschitz constants; use global mode");
    const double num = std::pow(2.0, 1.0 - coeffs.p / 2.0) * margin;
    const double den = std::pow(be.eta * coeffs.lipschitz_f, coeffs.p);
    width = 0.9 * std::pow(num / den, 2.0 / coeffs.p);
  }
  const std::size_t steps_per_band =
      std::max<std::size_t>(1, static_cast<std::size_t>(width / grid.dt()));
  out.band_width = static_cast<double>(steps_per_band) * grid.dt();
  out.contraction_bound =
      std::pow(2.0, coeffs.p / 2.0 - 1.0) * std::pow(out.band_width, coeffs.p / 2.0) *
          std::pow(be.eta * coeffs.lipschitz_f, coeffs.p) +
      std::pow(2.0, 1.5 * coeffs.p - 2.0) * gsum;

  const std::size_t n_steps = grid.steps();
  std::vector<std::size_t> edges;  // descending band edges, N first
  for (std::size_t e = n_steps;; e -= std::min(e, steps_per_band)) {
    edges.push_back(e);
    if (e == 0) break;
  }
  out.bands = edges.size() - 1;

  auto xi = terminal_values(noise, coeffs);
  std::vector<EmpiricalMeasure> composite(n_nodes, EmpiricalMeasure::point_mass(0.0, samples));
  composite[n_steps] = EmpiricalMeasure(xi);

  std::vector<double> edge_terminal = xi;
  std::size_t iteration = 0;
  SolutionBundle last_band_bundle;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const std::size_t hi = edges[b], lo = edges[b + 1];
    bool converged = false;
    for (std::size_t r = 0; r < opts.max_iter; ++r) {
      auto bundle =
          solve_rbsde_partial(noise, coeffs, MeasureFlow(composite), reg, hi, edge_terminal,
                              opts.inner);
      double delta = 0.0;
      std::vector<EmpiricalMeasure> updated;
      updated.reserve(hi - lo);
      for (std::size_t k = lo; k < hi; ++k) {
        std::vector<double> col(samples);
        for (std::size_t i = 0; i < samples; ++i) col[i] = bundle.y(i, k);
        EmpiricalMeasure nu_k(std::move(col));
        delta = std::max(delta, wasserstein_p(nu_k, composite[k], coeffs.p));
        updated.push_back(std::move(nu_k));
      }
      for (std::size_t k = lo; k < hi; ++k) composite[k] = std::move(updated[k - lo]);
      out.trace.push_back({iteration++, b, delta, seconds_since(t0)});
      last_band_bundle = std::move(bundle);
      if (delta < opts.tol_picard) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw DivergedError("solve_meanfield: band Picard iteration exceeded max_iter",
                          band_deltas(out.trace, b));
    edge_terminal.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) edge_terminal[i] = last_band_bundle.y(i, lo);
  }

  out.flow = MeasureFlow(composite);
  out.bundle = solve_rbsde(noise, coeffs, out.flow, reg, opts.inner);
  return out;
}

void write_trace_csv(const std::vector<PicardStep>& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ParameterError("write_trace_csv: cannot open " + path);
  std::fprintf(f, "iter,sup_wasserstein_delta,wall_time\n");
  for (const auto& s : trace)
    std::fprintf(f, "%zu,%.17g,%.6f\n", s.iteration, s.delta, s.seconds);
  std::fclose(f);
}

void write_flow_csv(const MeasureFlow& flow, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ParameterError("write_flow_csv: cannot open " + path);
  std::fprintf(f, "node,sample,value\n");
  for (std::size_t k = 0; k < flow.nodes(); ++k) {
    const auto& samples = flow.at(k).samples();
    for (std::size_t i = 0; i < samples.size(); ++i)
      std::fprintf(f, "%zu,%zu,%.17g\n", k, i, samples[i]);
  }
  std::fclose(f);
}

KContinuityReport continuity_of_k_diagnostic(const SolutionBundle& bundle,
                                             const NoiseBundle& noise,
                                             const CoefficientSet& coeffs, double jump_threshold) {
  if (bundle.particles() != noise.particles())
    throw ParameterError("continuity_of_k_diagnostic: bundle/noise mismatch");
  KContinuityReport rep;
  rep.obstacle_separable_lusc = coeffs.obstacle_separable_lusc;
  rep.flags_per_node.assign(bundle.nodes(), 0);
  for (std::size_t i = 0; i < bundle.particles(); ++i) {
    for (std::size_t k = 0; k + 1 < bundle.nodes(); ++k) {
      if (bundle.dk(i, k) > jump_threshold && !noise.any_jump(i, k)) {
        ++rep.flagged_cells;
        ++rep.flags_per_node[k];
        rep.flagged_mass += bundle.dk(i, k);
      }
    }
  }
  rep.flagged_mass /= static_cast<double>(bundle.particles());
  return rep;
}

}  // namespace mfr
