#include <doctest.h>

#include <cmath>
#include <random>

#include "mfr/apriori.hpp"
#include "mfr/errors.hpp"
#include "mfr/rbsde.hpp"
#include "support.hpp"

using namespace mfr;
using mfr::testing::base_coeffs;
using mfr::testing::frozen_flow;

namespace {

double grand_mean_z(const SolutionBundle& b) {
  double s = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < b.particles(); ++i)
    for (std::size_t k = 0; k + 1 < b.nodes(); ++k) {
      s += b.z(i, k);
      ++cnt;
    }
  return s / static_cast<double>(cnt);
}

double grand_mean_u(const SolutionBundle& b, std::size_t mark) {
  double s = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < b.particles(); ++i)
    for (std::size_t k = 0; k + 1 < b.nodes(); ++k) {
      s += b.u(i, k, mark);
      ++cnt;
    }
  return s / static_cast<double>(cnt);
}

}  // namespace

TEST_CASE("martingale recovery: terminal Brownian value") {
  TimeGrid grid(1.0, 50);
  auto coeffs = base_coeffs();
  make_terminal("brownian", {}, coeffs);
  const std::size_t m_samples = 4000;
  auto noise = simulate_noise(grid, JumpMeasure{}, m_samples, 77);
  auto flow = MeasureFlow::point_mass(0.0, grid.nodes(), m_samples);
  RegressionSpec reg;
  auto b = solve_rbsde(noise, coeffs, flow, reg);

  // the regression chain preserves the sample mean of the terminal exactly
  const auto xi = terminal_values(noise, coeffs);
  double xi_mean = 0.0;
  for (double v : xi) xi_mean += v;
  xi_mean /= static_cast<double>(m_samples);
  CHECK(b.y(0, 0) == doctest::Approx(xi_mean).epsilon(1e-10));

  // Y tracks the Brownian path, Z tracks its unit loading, K stays flat
  double rms = 0.0;
  for (std::size_t i = 0; i < m_samples; ++i)
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const double d = b.y(i, k) - b.state(i, k).brownian;
      rms += d * d;
    }
  rms = std::sqrt(rms / static_cast<double>(m_samples * grid.nodes()));
  CHECK(rms < 0.05);
  CHECK(grand_mean_z(b) == doctest::Approx(1.0).epsilon(0.05));
  for (std::size_t i = 0; i < m_samples; ++i)
    for (std::size_t k = 0; k < grid.nodes(); ++k) CHECK(b.dk(i, k) == 0.0);
}

TEST_CASE("martingale recovery: compensated Poisson terminal") {
  TimeGrid grid(1.0, 50);
  JumpMeasure nu({1.0}, {1.0});
  auto coeffs = base_coeffs();
  make_terminal("compensated_poisson", {}, coeffs);
  const std::size_t m_samples = 4000;
  auto noise = simulate_noise(grid, nu, m_samples, 911);
  auto flow = MeasureFlow::point_mass(0.0, grid.nodes(), m_samples);
  RegressionSpec reg;
  auto b = solve_rbsde(noise, coeffs, flow, reg);

  CHECK(grand_mean_u(b, 0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(grand_mean_z(b)) < 0.05);
  double rms = 0.0;
  for (std::size_t i = 0; i < m_samples; ++i)
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const double d = b.y(i, k) - b.state(i, k).compensated[0];
      rms += d * d;
    }
  rms = std::sqrt(rms / static_cast<double>(m_samples * grid.nodes()));
  CHECK(rms < 0.08);
}

TEST_CASE("deterministic reflection against a frozen flow") {
  // obstacle 0.2 mean(mu) + 3 on [0, T/2), terminal 2, driver 0; the frozen
  // flow is the known solution, so the solve reproduces it exactly
  TimeGrid grid(1.0, 10);
  auto coeffs = base_coeffs();
  make_obstacle("step_mean", {{"g2", 0.2}, {"level", 3.0}, {"frac", 0.5}}, grid, coeffs);
  make_terminal("constant", {{"value", 2.0}}, coeffs);
  const std::size_t m_samples = 8;
  auto noise = simulate_noise(grid, JumpMeasure{}, m_samples, 5);
  std::vector<double> truth(grid.nodes());
  for (std::size_t k = 0; k < grid.nodes(); ++k) truth[k] = grid.node(k) < 0.5 ? 3.75 : 2.0;
  auto flow = frozen_flow(truth, m_samples);
  RegressionSpec reg;
  auto b = solve_rbsde(noise, coeffs, flow, reg);

  for (std::size_t i = 0; i < m_samples; ++i) {
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      CHECK(b.y(i, k) == doctest::Approx(truth[k]).epsilon(1e-10));
      if (k == 4)
        CHECK(b.dk(i, k) == doctest::Approx(1.75).epsilon(1e-10));
      else
        CHECK(b.dk(i, k) <= 1e-12);  // rounding-scale reflections at equality
    }
    CHECK(b.k_at(i, 0) == 0.0);
    CHECK(b.k_at(i, grid.nodes() - 1) == doctest::Approx(1.75).epsilon(1e-10));
  }
  CHECK(std::abs(flatness_residual(b, coeffs, flow)) <= 1e-10);
  auto inv = check_bundle(b, coeffs, flow);
  CHECK(inv.min_domination >= -1e-10);
  CHECK(inv.max_negative_dk >= 0.0);
}

TEST_CASE("structural invariants on a noisy reflected scenario") {
  TimeGrid grid(1.0, 40);
  JumpMeasure nu({1.0}, {2.0});
  CoefficientSet coeffs = base_coeffs();
  make_driver("affine", {{"ay", 0.3}, {"az", 0.2}, {"au", 0.2}, {"amean", 0.2}}, nu, coeffs);
  make_obstacle("affine_mean", {{"g1", 0.2}, {"g2", 0.1}, {"c0", 0.3}}, grid, coeffs);
  make_terminal("bounded_mix", {{"offset", 1.0}, {"scale", 0.4}, {"bscale", 1.0}, {"jscale", 0.5}},
                coeffs);
  const std::size_t m_samples = 600;
  auto noise = simulate_noise(grid, nu, m_samples, 23);
  auto flow = MeasureFlow::point_mass(1.0, grid.nodes(), m_samples);
  RegressionSpec reg;
  reg.degree = 2;
  auto b = solve_rbsde(noise, coeffs, flow, reg);

  auto inv = check_bundle(b, coeffs, flow);
  CHECK(inv.min_domination >= -1e-10);
  CHECK(inv.max_flatness <= 1e-10);
  CHECK(inv.max_negative_dk >= 0.0);
  CHECK(std::abs(flatness_residual(b, coeffs, flow)) <= 1e-10);
  // some reflection actually happened, otherwise the case is vacuous
  double total_dk = 0.0;
  for (std::size_t i = 0; i < m_samples; ++i) total_dk += b.k_at(i, grid.nodes() - 1);
  CHECK(total_dk > 0.0);
}

TEST_CASE("refusals: explosive steps and non-contractive obstacles") {
  TimeGrid grid(1.0, 4);  // dt = 0.25
  auto noise = simulate_noise(grid, JumpMeasure{}, 4, 1);
  auto flow = MeasureFlow::point_mass(0.0, grid.nodes(), 4);
  RegressionSpec reg;

  auto fast = base_coeffs();
  make_driver("linear_y", {{"a", 5.0}}, JumpMeasure{}, fast);  // C_f dt = 1.25
  CHECK_THROWS_AS(solve_rbsde(noise, fast, flow, reg), RefusedError);

  auto steep = base_coeffs();
  make_obstacle("affine_mean", {{"g1", 1.2}, {"c0", -5.0}}, grid, steep);
  CHECK_THROWS_AS(solve_rbsde(noise, steep, flow, reg), RefusedError);
}

namespace {

// two-point driving noise on two steps: four equally likely paths
NoiseBundle two_point_noise() {
  TimeGrid grid(1.0, 2);
  std::vector<double> db = {+1, +1, +1, -1, -1, +1, -1, -1};
  return NoiseBundle::from_arrays(grid, JumpMeasure{}, db, {}, 0);
}

}  // namespace

TEST_CASE("optimal stopping on a two-point tree matches exhaustive strategies") {
  auto noise = two_point_noise();
  CoefficientSet coeffs = base_coeffs();
  coeffs.obstacle = [](const MarkovState& s, double, const EmpiricalMeasure&) {
    return s.brownian + 1.5;
  };
  coeffs.gamma1 = 0.0;
  coeffs.gamma2 = 0.0;
  coeffs.terminal = [](const MarkovState& s) { return s.brownian * s.brownian; };

  auto flow = MeasureFlow::point_mass(0.0, 3, 4);
  RegressionSpec reg;
  reg.degree = 1;
  reg.ridge = 0.0;
  auto b = solve_rbsde(noise, coeffs, flow, reg);

  // brute force over adapted stopping strategies: stop at 0, and per branch
  // of B_1, stop at 1 or run to the terminal payoff
  const double payoff_up = 1.0 + 1.5, payoff_down = -1.0 + 1.5;
  const double cont_up = 0.5 * (4.0 + 0.0), cont_down = 0.5 * (0.0 + 4.0);
  double best = 1.5;  // stop immediately: obstacle at B = 0
  for (int up = 0; up < 2; ++up)
    for (int down = 0; down < 2; ++down) {
      const double v_up = up ? payoff_up : cont_up;
      const double v_down = down ? payoff_down : cont_down;
      best = std::max(best, 0.5 * (v_up + v_down));
    }
  CHECK(b.y(0, 0) == doctest::Approx(best).epsilon(1e-9));
  CHECK(best == doctest::Approx(2.25));
}

TEST_CASE("raising the obstacle never lowers the solution") {
  auto noise = two_point_noise();
  auto flow = MeasureFlow::point_mass(0.0, 3, 4);
  RegressionSpec reg;
  reg.degree = 1;
  reg.ridge = 0.0;

  std::mt19937 rng(8);
  std::uniform_real_distribution<double> off(-2.0, 2.0), lift(0.0, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const double c0 = off(rng), raise = lift(rng);
    CoefficientSet lo = base_coeffs();
    lo.terminal = [](const MarkovState& s) { return s.brownian * s.brownian; };
    lo.obstacle = [c0](const MarkovState& s, double, const EmpiricalMeasure&) {
      return s.brownian + c0;
    };
    CoefficientSet hi = lo;
    hi.obstacle = [c0, raise](const MarkovState& s, double, const EmpiricalMeasure&) {
      return s.brownian + c0 + raise;
    };
    auto a = solve_rbsde(noise, lo, flow, reg);
    auto b = solve_rbsde(noise, hi, flow, reg);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t k = 0; k < 3; ++k) CHECK(b.y(i, k) >= a.y(i, k) - 1e-12);
  }
}

TEST_CASE("rank-deficient regressions fall back to the sample mean with a warning") {
  TimeGrid grid(1.0, 5);
  JumpMeasure nu({1.0}, {1.0});
  auto coeffs = base_coeffs();
  make_terminal("brownian", {}, coeffs);
  // 4 samples cannot support a degree-3 basis over 2 state variables
  auto noise = simulate_noise(grid, nu, 4, 12);
  auto flow = MeasureFlow::point_mass(0.0, grid.nodes(), 4);
  RegressionSpec reg;
  reg.degree = 3;
  auto b = solve_rbsde(noise, coeffs, flow, reg);
  CHECK(b.regression_warnings > 0);
  // the fallback chain still preserves the terminal mean exactly
  const auto xi = terminal_values(noise, coeffs);
  double mean = 0.0;
  for (double v : xi) mean += v;
  mean /= 4.0;
  CHECK(b.y(0, 0) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("plain backward solve: conditional expectation and linear growth") {
  TimeGrid grid(1.0, 100);
  const std::size_t m_samples = 500;
  auto noise = simulate_noise(grid, JumpMeasure{}, m_samples, 3);
  auto flow = MeasureFlow::point_mass(0.0, grid.nodes(), m_samples);
  RegressionSpec reg;

  // zero driver reduces to iterated regression of the terminal value
  auto zero = base_coeffs();
  std::vector<double> term(m_samples);
  for (std::size_t i = 0; i < m_samples; ++i) term[i] = noise.brownian_at(i, grid.steps());
  auto plain = nonlinear_expectation(noise, zero, flow, reg, grid.steps(), term);
  double mean_term = 0.0;
  for (double v : term) mean_term += v;
  mean_term /= static_cast<double>(m_samples);
  CHECK(plain.y(0, 0) == doctest::Approx(mean_term).epsilon(1e-10));
  for (std::size_t i = 0; i < m_samples; ++i)
    for (std::size_t k = 0; k < plain.nodes(); ++k) CHECK(plain.dk(i, k) == 0.0);

  // linear driver with deterministic terminal follows the exponential
  auto lin = base_coeffs();
  make_driver("linear_y", {{"a", 0.4}}, JumpMeasure{}, lin);
  std::vector<double> b_term(m_samples, 1.5);
  auto grown = nonlinear_expectation(noise, lin, flow, reg, grid.steps(), b_term);
  CHECK(grown.y(0, 0) == doctest::Approx(1.5 * std::exp(0.4)).epsilon(5e-3));

  // inner iteration count obeys the contraction budget
  const double rate = lin.lipschitz_f * grid.dt();  // 0.004
  const auto cap = static_cast<std::size_t>(
      std::ceil(std::log(1e-12) / std::log(rate)));
  CHECK(grown.max_inner_iterations <= cap);
}

TEST_CASE("pointwise larger terminals do not lower the value") {
  TimeGrid grid(1.0, 40);
  JumpMeasure nu({1.0}, {1.0});
  auto coeffs = base_coeffs();
  make_driver("affine", {{"ay", 0.3}, {"au", 0.4}}, nu, coeffs);
  REQUIRE(coeffs.comparison_flag);
  const std::size_t m_samples = 2000;
  auto noise = simulate_noise(grid, nu, m_samples, 71);
  auto flow = MeasureFlow::point_mass(0.0, grid.nodes(), m_samples);
  RegressionSpec reg;
  reg.degree = 2;

  std::vector<double> t1(m_samples), t2(m_samples);
  for (std::size_t i = 0; i < m_samples; ++i) {
    const double bt = noise.brownian_at(i, grid.steps());
    t1[i] = std::tanh(bt);
    t2[i] = t1[i] + 0.5 * (1.0 + std::tanh(bt));  // adds a nonnegative amount
  }
  auto lo = nonlinear_expectation(noise, coeffs, flow, reg, grid.steps(), t1);
  auto hi = nonlinear_expectation(noise, coeffs, flow, reg, grid.steps(), t2);
  CHECK(hi.y(0, 0) >= lo.y(0, 0) - 0.02);
}

TEST_CASE("stability estimate: identical runs and constant offsets") {
  TimeGrid grid(1.0, 50);
  const std::size_t m_samples = 400;
  auto noise = simulate_noise(grid, JumpMeasure{}, m_samples, 15);
  auto flow = MeasureFlow::point_mass(0.0, grid.nodes(), m_samples);
  RegressionSpec reg;
  const std::vector<std::size_t> probes = {0, 12, 25, 37};

  auto zero = base_coeffs();
  std::vector<double> term(m_samples);
  for (std::size_t i = 0; i < m_samples; ++i)
    term[i] = std::tanh(noise.brownian_at(i, grid.steps()));
  auto run_a = nonlinear_expectation(noise, zero, flow, reg, grid.steps(), term);

  SUBCASE("identical coefficient sets give zero slack gap") {
    auto rep = apriori_check(run_a, zero, flow, run_a, zero, flow, noise, 2.0, probes, reg);
    for (const auto& pr : rep.probes) {
      CHECK(pr.min_slack >= -1e-14);
      CHECK(pr.mean_slack >= -1e-14);
    }
  }

  SUBCASE("constant driver difference: dY is exactly eps * (T - t)") {
    const double eps = 0.3;
    auto drift = base_coeffs();
    make_driver("affine", {{"c0", eps}}, JumpMeasure{}, drift);
    auto run_b = nonlinear_expectation(noise, drift, flow, reg, grid.steps(), term);
    for (std::size_t i = 0; i < m_samples; ++i)
      for (std::size_t k = 0; k < run_b.nodes(); ++k) {
        const double expect = eps * (grid.horizon() - grid.node(k));
        CHECK(run_b.y(i, k) - run_a.y(i, k) == doctest::Approx(expect).epsilon(1e-9));
      }
    auto rep = apriori_check(run_a, zero, flow, run_b, drift, flow, noise, 2.0, probes, reg);
    for (const auto& pr : rep.probes) CHECK(pr.mean_slack + 3.0 * pr.stderr_slack >= 0.0);
  }

  SUBCASE("terminal offset: dY is exactly the offset") {
    const double c = 0.7;
    auto term_hi = term;
    for (double& v : term_hi) v += c;
    auto run_c = nonlinear_expectation(noise, zero, flow, reg, grid.steps(), term_hi);
    for (std::size_t i = 0; i < m_samples; ++i)
      for (std::size_t k = 0; k < run_c.nodes(); ++k)
        CHECK(run_c.y(i, k) - run_a.y(i, k) == doctest::Approx(c).epsilon(1e-9));
    auto rep = apriori_check(run_a, zero, flow, run_c, zero, flow, noise, 2.0, probes, reg);
    for (const auto& pr : rep.probes) {
      CHECK(pr.mean_slack >= 0.0);
      CHECK(pr.min_slack >= -1e-9);
    }
  }
}
