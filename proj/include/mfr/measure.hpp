#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfr {

/// Empirical distribution on the real line held as a sorted sample array.
/// Summation helpers run over the sorted order, so results do not depend
/// on the order samples were inserted in.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  /// Sorts the samples on construction.
  explicit EmpiricalMeasure(std::vector<double> samples);

  /// Point mass delta_v represented by `count` equal samples.
  static EmpiricalMeasure point_mass(double v, std::size_t count);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const std::vector<double>& samples() const { return samples_; }
  std::span<const double> view() const { return samples_; }

  /// Cached at construction (summed over the sorted order).
  double mean() const { return mean_; }
  /// (1/M) sum |x_i|^p
  double abs_moment(double p) const;
  /// Left-continuous empirical quantile at u in [0,1].
  double quantile(double u) const;

 private:
  std::vector<double> samples_;
  double mean_ = 0.0;
};

/// Per-node empirical distributions over a time grid; all nodes hold the
/// same number of samples.
class MeasureFlow {
 public:
  MeasureFlow() = default;
  explicit MeasureFlow(std::vector<EmpiricalMeasure> per_node);

  /// Flow of a point mass delta_v at every node.
  static MeasureFlow point_mass(double v, std::size_t nodes, std::size_t count);

  std::size_t nodes() const { return per_node_.size(); }
  std::size_t sample_count() const { return per_node_.empty() ? 0 : per_node_[0].size(); }
  const EmpiricalMeasure& at(std::size_t k) const { return per_node_[k]; }

 private:
  std::vector<EmpiricalMeasure> per_node_;
};

}  // namespace mfr
