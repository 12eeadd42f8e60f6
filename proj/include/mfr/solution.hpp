#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfr/coefficients.hpp"
#include "mfr/grid.hpp"
#include "mfr/measure.hpp"
#include "mfr/path_metrics.hpp"

namespace mfr {

/// Discrete solution of a reflected backward system: arrays over
/// (particle, node). dK holds the reflection increment applied at a node;
/// K is its running sum with K_0 = 0, so K at node k accumulates the
/// increments of nodes 0..k-1.
class SolutionBundle {
 public:
  SolutionBundle() = default;
  SolutionBundle(std::size_t particles, std::size_t nodes, std::size_t marks);

  std::size_t particles() const { return n_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t marks() const { return marks_; }

  double& y(std::size_t i, std::size_t k) { return y_[i * nodes_ + k]; }
  double y(std::size_t i, std::size_t k) const { return y_[i * nodes_ + k]; }
  double& z(std::size_t i, std::size_t k) { return z_[i * nodes_ + k]; }
  double z(std::size_t i, std::size_t k) const { return z_[i * nodes_ + k]; }
  double& u(std::size_t i, std::size_t k, std::size_t j) {
    return u_[(i * nodes_ + k) * marks_ + j];
  }
  double u(std::size_t i, std::size_t k, std::size_t j) const {
    return u_[(i * nodes_ + k) * marks_ + j];
  }
  std::vector<double> u_row(std::size_t i, std::size_t k) const;
  double& dk(std::size_t i, std::size_t k) { return dk_[i * nodes_ + k]; }
  double dk(std::size_t i, std::size_t k) const { return dk_[i * nodes_ + k]; }
  /// K at node k: sum of dK over nodes < k.
  double k_at(std::size_t i, std::size_t k) const;

  const MarkovState& state(std::size_t i, std::size_t k) const { return states_[i * nodes_ + k]; }
  MarkovState& state(std::size_t i, std::size_t k) { return states_[i * nodes_ + k]; }

  PathSample y_path(std::size_t i) const;
  PathSample k_path(std::size_t i) const;
  std::vector<PathSample> y_paths() const;

  /// Empirical measure of Y values per node.
  MeasureFlow empirical_flow() const;

  std::size_t regression_warnings = 0;
  std::size_t max_inner_iterations = 0;

 private:
  std::size_t n_ = 0, nodes_ = 0, marks_ = 0;
  std::vector<double> y_, z_, u_, dk_;
  std::vector<MarkovState> states_;
};

/// CSV export: particle, node, Y, Z, U_1..U_m, K.
void write_bundle_csv(const SolutionBundle& b, const std::string& path);

/// Worst-case residuals of the structural solution properties, checked
/// against the coefficients and measure flow the bundle was solved with.
struct BundleInvariants {
  double min_domination = 0.0;   // min over (i,k) of Y - h(t, Y, mu)
  double max_flatness = 0.0;     // max over i of sum_k (Y - h) dK
  double max_negative_dk = 0.0;  // most negative reflection increment
  bool k_starts_at_zero = true;
};
BundleInvariants check_bundle(const SolutionBundle& b, const CoefficientSet& coeffs,
                              const MeasureFlow& flow);

}  // namespace mfr
