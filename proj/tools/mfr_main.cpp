// Command-line front end: scenario checks, solvers and experiment harnesses.
// Exit codes: 0 success, 1 malformed input, 2 refused precondition,
// 3 divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfr/chaos.hpp"
#include "mfr/config.hpp"
#include "mfr/errors.hpp"
#include "mfr/lln.hpp"
#include "mfr/meanfield.hpp"
#include "mfr/particles.hpp"
#include "mfr/path_metrics.hpp"
#include "mfr/rbsde.hpp"
#include "mfr/smallness.hpp"
#include "mfr/wasserstein.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mfr::ConfigError("cannot open scenario file '" + path + "'", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<double> read_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mfr::ParameterError("cannot open '" + path + "'");
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(std::stod(line));
  }
  if (out.empty()) throw mfr::ParameterError("no values in '" + path + "'");
  return out;
}

std::vector<std::vector<double>> read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mfr::ParameterError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw mfr::ParameterError("no rows in '" + path + "'");
  return rows;
}

void ensure_out(const std::string& dir) { std::filesystem::create_directories(dir); }

void print_verdict(const char* label, const mfr::SmallnessVerdict& v) {
  std::printf("%-12s %s  margin=%.12g  threshold=%.12g\n", label, v.pass ? "pass" : "fail",
              v.margin, v.threshold);
}

int cmd_check(const std::string& config_path) {
  const auto text = slurp(config_path);
  const auto sc = mfr::parse_scenario(text);
  const auto& c = sc.coeffs;
  print_verdict("existence", mfr::check_smallness(c.p, c.gamma1, c.gamma2, mfr::Regime::existence));
  print_verdict("chaos_Y", mfr::check_smallness(c.p, c.gamma1, c.gamma2, mfr::Regime::chaos_y));
  // chaos_full needs kappa in [2, p); fall back to the reference pair (4, 2)
  // when the scenario's p leaves no admissible kappa.
  double pf = c.p, kf = sc.kappa;
  if (!(kf >= 2.0 && kf < pf)) {
    pf = std::max(c.p, 4.0);
    kf = 2.0;
  }
  char label[32];
  std::snprintf(label, sizeof(label), "chaos_full");
  std::printf("# chaos_full evaluated at p=%g, kappa=%g\n", pf, kf);
  print_verdict(label, mfr::check_smallness(pf, c.gamma1, c.gamma2, mfr::Regime::chaos_full, kf));
  return 0;
}

int cmd_solve(const std::string& config_path, const std::string& out_dir) {
  const auto text = slurp(config_path);
  const auto sc = mfr::parse_scenario(text);
  const auto sol = mfr::solve_meanfield(sc.coeffs, sc.grid, sc.nu, sc.samples, sc.reg, sc.seed,
                                        sc.picard);
  double y0 = 0.0;
  for (std::size_t i = 0; i < sol.bundle.particles(); ++i) y0 += sol.bundle.y(i, 0);
  y0 /= static_cast<double>(sol.bundle.particles());
  std::printf("converged in %zu iterations, Y_0 mean = %.10g\n", sol.trace.size(), y0);

  if (!out_dir.empty()) {
    ensure_out(out_dir);
    mfr::write_trace_csv(sol.trace, out_dir + "/trace.csv");
    mfr::write_flow_csv(sol.flow, out_dir + "/flow.csv");
    mfr::write_bundle_csv(sol.bundle, out_dir + "/bundle.csv");
    nlohmann::json j;
    const auto hash = mfr::config_hash_hex(text);
    j["config_hash"] = hash;
    j["provenance"] = "mfr/0.1.0+cfg." + hash;
    j["y0_mean"] = y0;
    j["iterations"] = sol.trace.size();
    j["final_delta"] = sol.trace.empty() ? 0.0 : sol.trace.back().delta;
    j["bands"] = sol.bands;
    j["regression_warnings"] = sol.bundle.regression_warnings;
    j["flatness_residual"] = mfr::flatness_residual(sol.bundle, sc.coeffs, sol.flow);
    std::ofstream(out_dir + "/summary.json") << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_particles(const std::string& config_path, const std::string& out_dir) {
  const auto text = slurp(config_path);
  const auto sc = mfr::parse_scenario(text);
  const auto noise = mfr::simulate_noise(sc.grid, sc.nu, sc.particles, sc.seed);
  const auto xi = mfr::terminal_values(noise, sc.coeffs);
  const auto bundle = mfr::solve_particle_system(noise, sc.coeffs, sc.reg, xi, sc.particle_opts);
  double y0 = 0.0;
  for (std::size_t i = 0; i < bundle.particles(); ++i) y0 += bundle.y(i, 0);
  y0 /= static_cast<double>(bundle.particles());
  std::printf("solved %zu particles, Y_0 mean = %.10g\n", bundle.particles(), y0);

  if (!out_dir.empty()) {
    ensure_out(out_dir);
    mfr::write_bundle_csv(bundle, out_dir + "/bundle.csv");
    mfr::write_flow_csv(bundle.empirical_flow(), out_dir + "/flow.csv");
    mfr::write_offdiagonal_csv(mfr::offdiagonal_diagnostic(bundle, noise),
                               out_dir + "/offdiagonal.csv");
    nlohmann::json j;
    const auto hash = mfr::config_hash_hex(text);
    j["config_hash"] = hash;
    j["provenance"] = "mfr/0.1.0+cfg." + hash;
    j["y0_mean"] = y0;
    j["particles"] = bundle.particles();
    j["regression_warnings"] = bundle.regression_warnings;
    std::ofstream(out_dir + "/summary.json") << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_chaos(const std::string& config_path, const std::string& out_dir) {
  const auto text = slurp(config_path);
  auto sc = mfr::parse_scenario(text);
  if (sc.chaos.n_list.empty()) sc.chaos.n_list = {50, 100, 200};
  const auto report = mfr::run_chaos_experiment(sc.coeffs, sc.grid, sc.nu, sc.reg, sc.samples,
                                                sc.seed, sc.chaos, sc.picard);
  for (const auto& row : report.summary)
    std::printf("n=%-6zu mean_supW=%.6g (se %.2g)  component_sum=%.6g (se %.2g)\n", row.n,
                row.mean_supw, row.se_supw, row.mean_component, row.se_component);
  if (!out_dir.empty()) {
    ensure_out(out_dir);
    mfr::write_chaos_csv(report, out_dir + "/report.csv");
    mfr::write_chaos_json(report, mfr::config_hash_hex(text), out_dir + "/summary.json");
  }
  return 0;
}

int cmd_lln(const std::string& config_path, const std::string& out_dir) {
  const auto text = slurp(config_path);
  auto sc = mfr::parse_scenario(text);
  if (sc.chaos.n_list.empty()) sc.chaos.n_list = {25, 50, 100};
  for (std::size_t n : sc.chaos.n_list)
    if (n > sc.samples)
      throw mfr::ConfigError("chaos.n_list entries must not exceed samples", 0);
  const auto table = mfr::lln_experiment(sc.coeffs, sc.grid, sc.nu, sc.reg, sc.samples, sc.seed,
                                         sc.chaos.n_list, sc.chaos.reps, sc.picard);
  for (const auto& r : table.table.rows)
    std::printf("n=%-6zu mean=%.6g stderr=%.2g bound=%.6g\n", r.n, r.mean, r.std_error, r.bound);

  // path-space diagnostic: fresh copies against the converged reference
  const auto limit = mfr::solve_meanfield(sc.coeffs, sc.grid, sc.nu, sc.samples, sc.reg,
                                          mfr::derive_seed(sc.seed, 1), sc.picard);
  std::size_t pool_size = 0;
  for (std::size_t n : sc.chaos.n_list) pool_size = std::max(pool_size, n);
  pool_size *= 2;
  const auto pool_noise =
      mfr::simulate_noise(sc.grid, sc.nu, pool_size, mfr::derive_seed(sc.seed, 42));
  const auto pool_bundle = mfr::solve_rbsde(pool_noise, sc.coeffs, limit.flow, sc.reg);
  const auto diag = mfr::lln_diagnostic(pool_bundle.y_paths(), limit.bundle.y_paths(), sc.coeffs.p,
                                        sc.chaos.n_list, sc.chaos.reps,
                                        mfr::derive_seed(sc.seed, 43), mfr::AlignmentSearch{4, 4});

  if (!out_dir.empty()) {
    ensure_out(out_dir);
    mfr::write_decay_csv(table.table, out_dir + "/lln_wasserstein.csv");
    mfr::write_decay_csv(diag.matched, out_dir + "/lln_skorohod_matched.csv");
    mfr::write_decay_csv(diag.product, out_dir + "/lln_skorohod_product.csv");
    nlohmann::json j;
    const auto hash = mfr::config_hash_hex(text);
    j["config_hash"] = hash;
    j["provenance"] = "mfr/0.1.0+cfg." + hash;
    j["reps"] = sc.chaos.reps;
    j["worst_domination"] = table.worst_domination;
    j["worst_flatness"] = table.worst_flatness;
    std::ofstream(out_dir + "/summary.json") << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_metrics(const std::string& op, const std::vector<std::string>& files, double p,
                double delta, double horizon, std::size_t node) {
  if (op == "wasserstein") {
    auto a = read_column(files.at(0));
    auto b = read_column(files.at(1));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::printf("%.12g\n", mfr::wasserstein_p_general(a, b, p));
  } else if (op == "sup_wasserstein") {
    const auto a = read_matrix(files.at(0));
    const auto b = read_matrix(files.at(1));
    if (a.size() != b.size()) throw mfr::ParameterError("metrics: node counts differ");
    double sup = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      auto ra = a[k];
      auto rb = b[k];
      std::sort(ra.begin(), ra.end());
      std::sort(rb.begin(), rb.end());
      sup = std::max(sup, mfr::wasserstein_p_general(ra, rb, p));
    }
    std::printf("%.12g\n", sup);
  } else if (op == "skorohod_do" || op == "skorohod_d") {
    mfr::PathSample x{read_column(files.at(0))};
    mfr::PathSample y{read_column(files.at(1))};
    const double v = op == "skorohod_do" ? mfr::skorohod_do(x, y) : mfr::skorohod_d(x, y, horizon);
    std::printf("%.12g\n", v);
  } else if (op == "wprime") {
    mfr::PathSample x{read_column(files.at(0))};
    std::printf("%.12g\n", mfr::modulus_wprime(x, horizon, delta));
  } else if (op == "path_dt") {
    const auto a = read_matrix(files.at(0));
    const auto b = read_matrix(files.at(1));
    std::vector<mfr::PathSample> ps, qs;
    for (const auto& r : a) ps.push_back(mfr::PathSample{r});
    for (const auto& r : b) qs.push_back(mfr::PathSample{r});
    const auto d = mfr::path_wasserstein_dt(ps, qs, p, node);
    std::printf("%.12g%s\n", d.value, d.exact ? "" : " (upper bound)");
  } else {
    throw mfr::ParameterError("metrics: unknown op '" + op + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field reflected backward systems: solvers and diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* check = app.add_subcommand("check", "smallness verdicts for a scenario");
  check->add_option("config", config_path)->required();

  auto* solve = app.add_subcommand("solve", "solve the limit equation by measure-flow iteration");
  solve->add_option("config", config_path)->required();
  solve->add_option("--out", out_dir);

  auto* particles = app.add_subcommand("particles", "solve one coupled n-particle system");
  particles->add_option("config", config_path)->required();
  particles->add_option("--out", out_dir);

  auto* chaos = app.add_subcommand("chaos", "particle-vs-limit error ladder");
  chaos->add_option("config", config_path)->required();
  chaos->add_option("--out", out_dir);

  auto* lln = app.add_subcommand("lln", "empirical-law decay table");
  lln->add_option("config", config_path)->required();
  lln->add_option("--out", out_dir);

  std::string op;
  std::vector<std::string> files;
  double p = 2.0, delta = 0.1, horizon = 1.0;
  std::size_t node = 0;
  auto* metrics = app.add_subcommand("metrics", "distance computations on CSV inputs");
  metrics->add_option("--op", op)->required();
  metrics->add_option("files", files);
  metrics->add_option("--p", p);
  metrics->add_option("--delta", delta);
  metrics->add_option("--horizon", horizon);
  metrics->add_option("--node", node);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(config_path);
    if (solve->parsed()) return cmd_solve(config_path, out_dir);
    if (particles->parsed()) return cmd_particles(config_path, out_dir);
    if (chaos->parsed()) return cmd_chaos(config_path, out_dir);
    if (lln->parsed()) return cmd_lln(config_path, out_dir);
    if (metrics->parsed()) return cmd_metrics(op, files, p, delta, horizon, node);
  } catch (const mfr::ConfigError& e) {
    std::cerr << config_path << ":" << e.line << ": " << e.what() << "\n";
    return 1;
  } catch (const mfr::RefusedError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  } catch (const mfr::DivergedError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
