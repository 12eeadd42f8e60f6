#include "mfr/solution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mfr/errors.hpp"

namespace mfr {

SolutionBundle::SolutionBundle(std::size_t particles, std::size_t nodes, std::size_t marks)
    : n_(particles), nodes_(nodes), marks_(marks) {
  if (particles == 0 || nodes < 2) throw ParameterError("SolutionBundle: bad shape");
  y_.assign(n_ * nodes_, 0.0);
  z_.assign(n_ * nodes_, 0.0);
  u_.assign(n_ * nodes_ * marks_, 0.0);
  dk_.assign(n_ * nodes_, 0.0);
  states_.resize(n_ * nodes_);
}

std::vector<double> SolutionBundle::u_row(std::size_t i, std::size_t k) const {
  std::vector<double> row(marks_);
  for (std::size_t j = 0; j < marks_; ++j) row[j] = u(i, k, j);
  return row;
}

double SolutionBundle::k_at(std::size_t i, std::size_t k) const {
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) s += dk(i, j);
  return s;
}

PathSample SolutionBundle::y_path(std::size_t i) const {
  PathSample p;
  p.values.resize(nodes_);
  for (std::size_t k = 0; k < nodes_; ++k) p.values[k] = y(i, k);
  return p;
}

PathSample SolutionBundle::k_path(std::size_t i) const {
  PathSample p;
  p.values.resize(nodes_);
  double acc = 0.0;
  for (std::size_t k = 0; k < nodes_; ++k) {
    p.values[k] = acc;
    acc += dk(i, k);
  }
  return p;
}

std::vector<PathSample> SolutionBundle::y_paths() const {
  std::vector<PathSample> out;
  out.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) out.push_back(y_path(i));
  return out;
}

MeasureFlow SolutionBundle::empirical_flow() const {
  std::vector<EmpiricalMeasure> per;
  per.reserve(nodes_);
  for (std::size_t k = 0; k < nodes_; ++k) {
    std::vector<double> col(n_);
    for (std::size_t i = 0; i < n_; ++i) col[i] = y(i, k);
    per.emplace_back(std::move(col));
  }
  return MeasureFlow(std::move(per));
}

void write_bundle_csv(const SolutionBundle& b, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ParameterError("write_bundle_csv: cannot open " + path);
  std::fprintf(f, "particle,node,Y,Z");
  for (std::size_t j = 0; j < b.marks(); ++j) std::fprintf(f, ",U_%zu", j + 1);
  std::fprintf(f, ",K\n");
  for (std::size_t i = 0; i < b.particles(); ++i) {
    double k_acc = 0.0;
    for (std::size_t k = 0; k < b.nodes(); ++k) {
      std::fprintf(f, "%zu,%zu,%.17g,%.17g", i, k, b.y(i, k), b.z(i, k));
      for (std::size_t j = 0; j < b.marks(); ++j) std::fprintf(f, ",%.17g", b.u(i, k, j));
      std::fprintf(f, ",%.17g\n", k_acc);
      k_acc += b.dk(i, k);
    }
  }
  std::fclose(f);
}

BundleInvariants check_bundle(const SolutionBundle& b, const CoefficientSet& coeffs,
                              const MeasureFlow& flow) {
  if (flow.nodes() != b.nodes()) throw ParameterError("check_bundle: flow grid mismatch");
  BundleInvariants inv;
  inv.min_domination = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.particles(); ++i) {
    double flat = 0.0;
    for (std::size_t k = 0; k < b.nodes(); ++k) {
      const double yv = b.y(i, k);
      const double h = coeffs.obstacle(b.state(i, k), yv, flow.at(k));
      inv.min_domination = std::min(inv.min_domination, yv - h);
      flat += (yv - h) * b.dk(i, k);
      inv.max_negative_dk = std::min(inv.max_negative_dk, b.dk(i, k));
    }
    inv.max_flatness = std::max(inv.max_flatness, std::abs(flat));
  }
  return inv;
}

}  // namespace mfr
