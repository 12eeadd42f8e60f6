#include "mfr/chaos.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "mfr/errors.hpp"
#include "mfr/wasserstein.hpp"

namespace mfr {

namespace {

double elapsed(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ChaosSummaryRow summarize(std::size_t n, const std::vector<ChaosCell>& cells, double p) {
  ChaosSummaryRow row;
  row.n = n;
  std::vector<double> supw, comp;
  for (const auto& c : cells)
    if (c.n == n) {
      supw.push_back(c.err_y_supw);
      comp.push_back(c.component_sum(p));
    }
  row.reps = supw.size();
  auto stats = [](const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    if (v.size() > 1) var /= static_cast<double>(v.size() - 1);
    se = std::sqrt(var / static_cast<double>(v.size()));
  };
  if (!supw.empty()) {
    stats(supw, row.mean_supw, row.se_supw);
    stats(comp, row.mean_component, row.se_component);
  }
  return row;
}

}  // namespace

double ChaosCell::component_sum(double p) const {
  return std::pow(err_y_sp, 1.0 / p) + std::pow(err_z, 1.0 / p) + std::pow(err_u, 1.0 / p) +
         std::pow(err_k, 1.0 / p);
}

ChaosCell chaos_metrics(const SolutionBundle& system, const SolutionBundle& copies,
                        const JumpMeasure& nu, double dt, double p) {
  if (system.particles() != copies.particles() || system.nodes() != copies.nodes())
    throw ParameterError("chaos_metrics: bundles do not match");
  const std::size_t n = system.particles();
  const std::size_t nodes = system.nodes();
  const std::size_t marks = nu.mark_count();
  ChaosCell cell;
  cell.n = n;

  const auto flow_sys = system.empirical_flow();
  const auto flow_cop = copies.empirical_flow();
  for (std::size_t k = 0; k < nodes; ++k)
    cell.err_y_supw =
        std::max(cell.err_y_supw, std::pow(wasserstein_p(flow_sys.at(k), flow_cop.at(k), p), p));

  std::vector<double> v_y(n), v_z(n), v_u(n), v_k(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sup_dy = 0.0, sum_dz = 0.0, sum_du = 0.0, sup_dk = 0.0;
    double k_sys = 0.0, k_cop = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
      sup_dy = std::max(sup_dy, std::abs(system.y(i, k) - copies.y(i, k)));
      sup_dk = std::max(sup_dk, std::abs(k_sys - k_cop));
      if (k + 1 < nodes) {
        const double dz = system.z(i, k) - copies.z(i, k);
        sum_dz += dz * dz * dt;
        double du2 = 0.0;
        for (std::size_t j = 0; j < marks; ++j) {
          const double du = system.u(i, k, j) - copies.u(i, k, j);
          du2 += nu.intensity(j) * du * du;
        }
        sum_du += du2 * dt;
        k_sys += system.dk(i, k);
        k_cop += copies.dk(i, k);
      }
    }
    v_y[i] = std::pow(sup_dy, p);
    v_z[i] = std::pow(sum_dz, p / 2.0);
    v_u[i] = std::pow(sum_du, p / 2.0);
    v_k[i] = std::pow(sup_dk, p);
  }
  auto sorted_mean = [n](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(n);
  };
  cell.err_y_sp = sorted_mean(v_y);
  cell.err_z = sorted_mean(v_z);
  cell.err_u = sorted_mean(v_u);
  cell.err_k = sorted_mean(v_k);
  return cell;
}

ChaosReport run_chaos_experiment(const CoefficientSet& coeffs, const TimeGrid& grid,
                                 const JumpMeasure& nu, const RegressionSpec& reg,
                                 std::size_t samples, std::uint64_t seed,
                                 const ChaosParams& params, const PicardOptions& picard) {
  const auto verdict =
      check_smallness(coeffs.p, coeffs.gamma1, coeffs.gamma2, params.regime, params.kappa);
  if (!verdict.pass && !picard.allow_unproven)
    throw RefusedError("run_chaos_experiment: scenario outside the selected smallness regime");

  const auto t0 = std::chrono::steady_clock::now();
  const auto limit = solve_meanfield(coeffs, grid, nu, samples, reg, derive_seed(seed, 1), picard);

  ChaosReport report;
  report.metric_p = params.metric_p;
  report.seed = seed;
  report.reps = params.reps;
  report.worst_domination = std::numeric_limits<double>::infinity();
  const double p = params.metric_p;
  const double dt = grid.dt();
  auto fold_invariants = [&report](const BundleInvariants& inv) {
    report.worst_domination = std::min(report.worst_domination, inv.min_domination);
    report.worst_flatness = std::max(report.worst_flatness, inv.max_flatness);
  };
  fold_invariants(check_bundle(limit.bundle, coeffs, limit.flow));

  for (std::size_t n : params.n_list) {
    for (std::size_t rep = 0; rep < params.reps; ++rep) {
      if (elapsed(t0) > params.budget_seconds) {
        report.complete = false;
        break;
      }
      const auto cell_start = std::chrono::steady_clock::now();
      const auto cell_seed = derive_seed(seed, n, rep + 2);
      const auto noise = simulate_noise(grid, nu, n, cell_seed);
      const auto xi = terminal_values(noise, coeffs);
      auto xi_n = xi;
      if (params.terminal_perturb != 0.0) {
        const double eps = params.terminal_perturb / static_cast<double>(n);
        for (double& v : xi_n) v += eps;
      }

      const auto copies = solve_rbsde(noise, coeffs, limit.flow, reg, picard.inner);
      ParticleOptions popts;
      popts.inner = picard.inner;
      const auto system = solve_particle_system(noise, coeffs, reg, xi_n, popts);

      fold_invariants(check_bundle(copies, coeffs, limit.flow));
      fold_invariants(check_bundle(system, coeffs, system.empirical_flow()));

      ChaosCell cell = chaos_metrics(system, copies, nu, dt, p);
      cell.rep = rep;
      cell.seconds = elapsed(cell_start);
      report.cells.push_back(cell);
    }
    if (!report.complete) break;
  }

  for (std::size_t n : params.n_list) {
    auto row = summarize(n, report.cells, p);
    if (row.reps > 0) report.summary.push_back(row);
  }
  report.wall_seconds = elapsed(t0);
  return report;
}

LlnExperiment lln_experiment(const CoefficientSet& coeffs, const TimeGrid& grid,
                             const JumpMeasure& nu, const RegressionSpec& reg,
                             std::size_t samples, std::uint64_t seed,
                             const std::vector<std::size_t>& n_list, std::size_t reps,
                             const PicardOptions& picard) {
  const auto limit = solve_meanfield(coeffs, grid, nu, samples, reg, derive_seed(seed, 1), picard);
  const std::size_t steps = grid.steps();
  const double p = coeffs.p;
  LlnExperiment out;
  out.worst_domination = std::numeric_limits<double>::infinity();
  auto fold_invariants = [&out](const BundleInvariants& inv) {
    out.worst_domination = std::min(out.worst_domination, inv.min_domination);
    out.worst_flatness = std::max(out.worst_flatness, inv.max_flatness);
  };
  fold_invariants(check_bundle(limit.bundle, coeffs, limit.flow));

  double path_moment = 0.0;
  for (std::size_t i = 0; i < limit.bundle.particles(); ++i) {
    double sup = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) sup = std::max(sup, std::abs(limit.bundle.y(i, k)));
    path_moment += std::pow(sup, p);
  }
  path_moment /= static_cast<double>(limit.bundle.particles());
  const double bound = std::pow(2.0, p) * path_moment;

  DecayTable& table = out.table;
  table.coupling = "sup-node wasserstein vs reference flow";
  for (std::size_t n : n_list) {
    std::vector<double> est;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto noise = simulate_noise(grid, nu, n, derive_seed(seed, n, rep + 2));
      const auto copies = solve_rbsde(noise, coeffs, limit.flow, reg, picard.inner);
      fold_invariants(check_bundle(copies, coeffs, limit.flow));
      const auto flow_n = copies.empirical_flow();
      double sup = 0.0;
      for (std::size_t k = 0; k <= steps; ++k) {
        const double w = wasserstein_p_general(flow_n.at(k).view(), limit.flow.at(k).view(), p);
        sup = std::max(sup, std::pow(w, p));
      }
      est.push_back(sup);
    }
    DecayRow row;
    row.n = n;
    row.bound = bound;
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= static_cast<double>(est.size());
    row.mean = mean;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    if (est.size() > 1) var /= static_cast<double>(est.size() - 1);
    row.std_error = std::sqrt(var / static_cast<double>(est.size()));
    table.rows.push_back(row);
  }
  return out;
}

void write_chaos_csv(const ChaosReport& report, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ParameterError("write_chaos_csv: cannot open " + path);
  std::fprintf(f, "n,rep,err_Y_supW,err_Y_Sp,err_Z,err_U,err_K,seconds\n");
  for (const auto& c : report.cells)
    std::fprintf(f, "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f\n", c.n, c.rep, c.err_y_supw,
                 c.err_y_sp, c.err_z, c.err_u, c.err_k, c.seconds);
  std::fclose(f);
}

void write_chaos_json(const ChaosReport& report, const std::string& config_hash,
                      const std::string& path) {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["provenance"] = "mfr/0.1.0+cfg." + config_hash;
  j["seed"] = report.seed;
  j["reps"] = report.reps;
  j["metric_p"] = report.metric_p;
  j["complete"] = report.complete;
  j["wall_seconds"] = report.wall_seconds;
  j["worst_domination"] = report.worst_domination;
  j["worst_flatness"] = report.worst_flatness;
  j["summary"] = nlohmann::json::array();
  for (const auto& row : report.summary) {
    j["summary"].push_back({{"n", row.n},
                            {"reps", row.reps},
                            {"mean_supW", row.mean_supw},
                            {"stderr_supW", row.se_supw},
                            {"mean_component_sum", row.mean_component},
                            {"stderr_component_sum", row.se_component}});
  }
  std::ofstream out(path);
  if (!out) throw ParameterError("write_chaos_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace mfr
