#include <doctest.h>

#include <cmath>

#include "mfr/errors.hpp"
#include "mfr/gronwall.hpp"
#include "mfr/smallness.hpp"
#include "mfr/meanfield.hpp"
#include "mfr/wasserstein.hpp"
#include "support.hpp"

using namespace mfr;
using mfr::testing::base_coeffs;

TEST_CASE("no feedback: two iterations to the constant solution") {
  TimeGrid grid(1.0, 8);
  auto coeffs = base_coeffs();
  make_terminal("constant", {{"value", 1.7}}, coeffs);
  PicardOptions opts;
  opts.tol_picard = 1e-12;
  auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, 16, RegressionSpec{}, 3, opts);
  CHECK(sol.trace.size() == 2);
  for (std::size_t k = 0; k < grid.nodes(); ++k)
    CHECK(sol.flow.at(k).mean() == doctest::Approx(1.7).epsilon(1e-14));
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t k = 0; k < grid.nodes(); ++k)
      CHECK(sol.bundle.y(i, k) == doctest::Approx(1.7).epsilon(1e-14));
}

TEST_CASE("linear mean coupling follows the exponential") {
  TimeGrid grid(1.0, 100);
  auto coeffs = base_coeffs();
  make_driver("linear_mean", {{"a", 0.5}}, JumpMeasure{}, coeffs);
  make_terminal("constant", {{"value", 1.0}}, coeffs);
  PicardOptions opts;
  opts.tol_picard = 1e-11;
  auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, 32, RegressionSpec{}, 5, opts);

  // the deterministic implicit recursion solves m_k = m_{k+1} / (1 - a dt)
  const double discrete = std::pow(1.0 - 0.5 * grid.dt(), -100.0);
  CHECK(sol.bundle.y(0, 0) == doctest::Approx(discrete).epsilon(1e-9));
  CHECK(sol.bundle.y(0, 0) == doctest::Approx(std::exp(0.5)).epsilon(5e-3));

  // trace decays monotonically down to the tolerance
  for (std::size_t r = 1; r < sol.trace.size(); ++r)
    if (sol.trace[r - 1].delta > 1e-10) CHECK(sol.trace[r].delta < sol.trace[r - 1].delta);
}

TEST_CASE("step obstacle: exact deterministic reflection through the fixed point") {
  TimeGrid grid(1.0, 10);
  auto coeffs = base_coeffs();
  make_driver("zero", {}, JumpMeasure{}, coeffs);
  make_obstacle("step_mean", {{"g1", 0.1}, {"g2", 0.1}, {"level", 3.0}, {"frac", 0.5}}, grid,
                coeffs);
  make_terminal("constant", {{"value", 2.0}}, coeffs);
  REQUIRE(check_smallness(2.0, 0.1, 0.1, Regime::existence).pass);

  PicardOptions opts;
  opts.tol_picard = 1e-10;
  const std::size_t m_samples = 8;
  auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, m_samples, RegressionSpec{}, 7, opts);

  for (std::size_t i = 0; i < m_samples; ++i) {
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const double expect = grid.node(k) < 0.5 ? 3.75 : 2.0;
      CHECK(sol.bundle.y(i, k) == doctest::Approx(expect).epsilon(1e-8));
      if (k == 4)
        CHECK(sol.bundle.dk(i, k) == doctest::Approx(1.75).epsilon(1e-8));
      else
        CHECK(sol.bundle.dk(i, k) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    }
  }
  CHECK(std::abs(flatness_residual(sol.bundle, coeffs, sol.flow)) < 1e-10);
  auto inv = check_bundle(sol.bundle, coeffs, sol.flow);
  CHECK(inv.min_domination >= -1e-10);
}

TEST_CASE("interval mode: banded construction with a geometric trace") {
  TimeGrid grid(1.0, 20);
  auto coeffs = base_coeffs();
  make_driver("linear_mean", {{"a", 0.5}}, JumpMeasure{}, coeffs);
  make_obstacle("affine_mean", {{"g1", 0.33}, {"g2", 0.33}, {"c0", -1.0}}, grid, coeffs);
  make_terminal("constant", {{"value", 2.0}}, coeffs);
  REQUIRE(check_smallness(2.0, 0.33, 0.33, Regime::existence).pass);

  PicardOptions opts;
  opts.mode = PicardOptions::Mode::interval;
  opts.tol_picard = 1e-9;
  opts.max_iter = 80;
  auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, 16, RegressionSpec{}, 11, opts);

  CHECK(sol.bands >= 2);
  CHECK(sol.contraction_bound > 0.0);
  CHECK(sol.contraction_bound < 1.0);
  CHECK(sol.band_width <= 0.9 * 0.52);  // admissible width for these constants

  // within each band the deltas decay at least at the proven ratio
  const std::size_t cap =
      static_cast<std::size_t>(std::ceil(std::log(opts.tol_picard) /
                                         std::log(sol.contraction_bound))) +
      2;
  for (std::size_t band = 0; band < sol.bands; ++band) {
    std::vector<double> deltas;
    for (const auto& s : sol.trace)
      if (s.band == band) deltas.push_back(s.delta);
    CHECK(deltas.size() <= cap);
    for (std::size_t r = 1; r < deltas.size(); ++r)
      if (deltas[r - 1] > 1e-8)
        CHECK(deltas[r] <= (sol.contraction_bound + 0.05) * deltas[r - 1]);
  }

  // the pasted solution still matches the plain global solve
  PicardOptions global;
  global.tol_picard = 1e-9;
  auto ref = solve_meanfield(coeffs, grid, JumpMeasure{}, 16, RegressionSpec{}, 11, global);
  CHECK(sol.bundle.y(0, 0) == doctest::Approx(ref.bundle.y(0, 0)).epsilon(1e-6));
}

TEST_CASE("refusal and divergence surfaces") {
  TimeGrid grid(1.0, 8);
  auto coeffs = base_coeffs();
  make_obstacle("affine_mean", {{"g1", 0.8}, {"g2", 0.8}, {"c0", -9.0}}, grid, coeffs);
  make_terminal("constant", {{"value", 1.0}}, coeffs);
  CHECK_THROWS_AS(solve_meanfield(coeffs, grid, JumpMeasure{}, 8, RegressionSpec{}, 1, {}),
                  RefusedError);

  PicardOptions forced;
  forced.allow_unproven = true;
  auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, 8, RegressionSpec{}, 1, forced);
  CHECK(sol.trace.back().delta < forced.tol_picard);

  auto coupled = base_coeffs();
  make_driver("linear_mean", {{"a", 0.5}}, JumpMeasure{}, coupled);
  make_terminal("constant", {{"value", 2.0}}, coupled);
  PicardOptions strangled;
  strangled.max_iter = 1;
  strangled.tol_picard = 1e-12;
  CHECK_THROWS_AS(solve_meanfield(coupled, grid, JumpMeasure{}, 8, RegressionSpec{}, 1, strangled),
                  DivergedError);
}

TEST_CASE("fixed-point stability, determinism, terminal consistency") {
  TimeGrid grid(1.0, 30);
  JumpMeasure nu({1.0}, {1.0});
  auto coeffs = base_coeffs();
  make_driver("linear_mean", {{"a", 0.4}}, nu, coeffs);
  make_obstacle("affine_mean", {{"g1", 0.1}, {"g2", 0.1}, {"c0", -0.5}}, grid, coeffs);
  make_terminal("bounded_mix", {{"offset", 1.0}, {"scale", 0.4}, {"bscale", 1.0}, {"jscale", 0.4}},
                coeffs);
  PicardOptions opts;
  opts.tol_picard = 1e-9;
  RegressionSpec reg;
  reg.degree = 2;
  const std::size_t m_samples = 400;
  auto sol = solve_meanfield(coeffs, grid, nu, m_samples, reg, 21, opts);

  // solving once more at the converged flow barely moves it
  auto noise = simulate_noise(grid, nu, m_samples, 21);
  auto again = solve_rbsde(noise, coeffs, sol.flow, reg);
  CHECK(sup_time_wasserstein(again.empirical_flow(), sol.flow, coeffs.p) < 2.0 * opts.tol_picard);

  // terminal values are the sampled terminals exactly
  auto xi = terminal_values(noise, coeffs);
  for (std::size_t i = 0; i < m_samples; ++i) CHECK(sol.bundle.y(i, grid.steps()) == xi[i]);

  // bit-identical reruns
  auto rerun = solve_meanfield(coeffs, grid, nu, m_samples, reg, 21, opts);
  REQUIRE(rerun.trace.size() == sol.trace.size());
  for (std::size_t r = 0; r < rerun.trace.size(); ++r)
    CHECK(rerun.trace[r].delta == sol.trace[r].delta);
  for (std::size_t i = 0; i < m_samples; ++i)
    for (std::size_t k = 0; k < grid.nodes(); ++k) CHECK(rerun.bundle.y(i, k) == sol.bundle.y(i, k));

  auto inv = check_bundle(sol.bundle, coeffs, sol.flow);
  CHECK(inv.min_domination >= -1e-10);
  CHECK(inv.max_flatness <= 1e-10);
}

TEST_CASE("backward integral inequality") {
  SUBCASE("flat case: bound equals the constant") {
    std::vector<double> g(51, 2.0), alpha(51, 0.0);
    auto r = backward_gronwall(g, alpha, 2.0, 1.0);
    CHECK(r.satisfied);
    for (double b : r.bound) CHECK(b == 2.0);
  }

  SUBCASE("equality case at N = 1000 stays within quadrature error") {
    const std::size_t nodes = 1001;
    const double a = 1.0, c = 1.0, horizon = 1.0;
    std::vector<double> g(nodes), alpha(nodes, a);
    for (std::size_t k = 0; k < nodes; ++k) {
      const double t = horizon * static_cast<double>(k) / static_cast<double>(nodes - 1);
      g[k] = c * std::exp(a * (horizon - t));
    }
    auto r = backward_gronwall(g, alpha, c, horizon);
    CHECK(r.satisfied);
    CHECK(r.hypothesis_ok);
    for (std::size_t k = 0; k < nodes; ++k) CHECK(std::abs(g[k] - r.bound[k]) <= 1e-9);
  }

  SUBCASE("inflated input is flagged") {
    const std::size_t nodes = 101;
    std::vector<double> g(nodes), alpha(nodes, 1.0);
    for (std::size_t k = 0; k < nodes; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(nodes - 1);
      g[k] = 2.0 * std::exp(1.0 - t);  // twice the admissible bound
    }
    auto r = backward_gronwall(g, alpha, 1.0, 1.0);
    CHECK_FALSE(r.satisfied);
    CHECK_FALSE(r.hypothesis_ok);
    CHECK(r.first_hypothesis_violation >= 0);
  }

  SUBCASE("negative alpha is a parameter error") {
    std::vector<double> g(11, 1.0), alpha(11, -0.1);
    CHECK_THROWS_AS(backward_gronwall(g, alpha, 1.0, 1.0), ParameterError);
  }
}

TEST_CASE("reflection increments without jump events: flags and refinement") {
  SUBCASE("no obstacle, no flags") {
    TimeGrid grid(1.0, 16);
    auto coeffs = base_coeffs();
    make_terminal("constant", {{"value", 1.0}}, coeffs);
    auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, 8, RegressionSpec{}, 2, {});
    auto noise = simulate_noise(grid, JumpMeasure{}, 8, 2);
    auto rep = continuity_of_k_diagnostic(sol.bundle, noise, coeffs, 1e-8);
    CHECK(rep.flagged_cells == 0);
    CHECK(rep.flagged_mass == 0.0);
  }

  SUBCASE("a discontinuous obstacle flags the step node at every resolution") {
    TimeGrid grid(1.0, 10);
    auto coeffs = base_coeffs();
    make_obstacle("step_mean", {{"g1", 0.1}, {"g2", 0.1}, {"level", 3.0}, {"frac", 0.5}}, grid,
                  coeffs);
    make_terminal("constant", {{"value", 2.0}}, coeffs);
    CHECK_FALSE(coeffs.obstacle_separable_lusc);
    PicardOptions opts;
    opts.tol_picard = 1e-10;
    auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, 8, RegressionSpec{}, 7, opts);
    auto noise = simulate_noise(grid, JumpMeasure{}, 8, 7);
    auto rep = continuity_of_k_diagnostic(sol.bundle, noise, coeffs, 0.1);
    CHECK(rep.flags_per_node[4] == 8);  // every particle reflects at the step
    CHECK(rep.flagged_mass == doctest::Approx(1.75).epsilon(1e-8));
  }

  SUBCASE("jump-driven obstacles run through the diagnostic") {
    TimeGrid grid(1.0, 40);
    JumpMeasure nu({1.0}, {3.0});
    auto coeffs = base_coeffs();
    make_obstacle("poisson_path_mean", {{"g1", 0.1}, {"g2", 0.1}, {"jscale", 0.8}, {"c0", 0.6}},
                  grid, coeffs);
    // the terminal must ride the same jump path to dominate the obstacle at
    // the terminal time for every realization
    make_terminal("compensated_poisson", {{"offset", 1.0}, {"scale", 0.89}}, coeffs);
    CHECK(coeffs.obstacle_separable_lusc);
    PicardOptions opts;
    opts.tol_picard = 1e-8;
    RegressionSpec reg;
    reg.degree = 2;
    const std::size_t m_samples = 400;
    auto sol = solve_meanfield(coeffs, grid, nu, m_samples, reg, 77, opts);
    auto noise = simulate_noise(grid, nu, m_samples, 77);
    double total_dk = 0.0;
    for (std::size_t i = 0; i < m_samples; ++i) total_dk += sol.bundle.k_at(i, grid.nodes() - 1);
    total_dk /= static_cast<double>(m_samples);
    CHECK(total_dk > 0.0);  // the rising obstacle does bind
    auto rep = continuity_of_k_diagnostic(sol.bundle, noise, coeffs, 0.4);
    CHECK(rep.flags_per_node.size() == grid.nodes());
    CHECK(rep.flagged_mass <= total_dk);
    auto inv = check_bundle(sol.bundle, coeffs, sol.flow);
    CHECK(inv.min_domination >= -1e-10);
    CHECK(inv.max_flatness <= 1e-10);
  }

  SUBCASE("a ramp obstacle sheds its flags under grid refinement") {
    auto run = [](std::size_t steps) {
      TimeGrid grid(1.0, steps);
      auto coeffs = base_coeffs();
      make_obstacle("ramp_mean", {{"g1", 0.1}, {"g2", 0.1}, {"level", 2.4}, {"frac", 0.7}}, grid,
                    coeffs);
      make_terminal("constant", {{"value", 2.0}}, coeffs);
      CHECK(coeffs.obstacle_separable_lusc);
      PicardOptions opts;
      opts.tol_picard = 1e-10;
      opts.max_iter = 120;
      auto sol = solve_meanfield(coeffs, grid, JumpMeasure{}, 8, RegressionSpec{}, 7, opts);
      auto noise = simulate_noise(grid, JumpMeasure{}, 8, 7);
      return continuity_of_k_diagnostic(sol.bundle, noise, coeffs, 0.1).flagged_mass;
    };
    const double coarse = run(20), mid = run(40), fine = run(80);
    CHECK(coarse > 0.0);  // binding actually occurs at the coarse level
    CHECK(mid <= coarse + 1e-12);
    CHECK(fine <= mid + 1e-12);
    CHECK(fine < coarse);
  }
}
