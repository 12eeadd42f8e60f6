#pragma once

#include <cstddef>
#include <vector>

namespace mfr {

/// Uniform time grid t_k = k*T/N on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::size_t nodes() const { return steps_ + 1; }
  double dt() const { return dt_; }
  double node(std::size_t k) const { return static_cast<double>(k) * dt_; }

 private:
  double horizon_;
  std::size_t steps_;
  double dt_;
};

/// Finite discrete jump measure: marks e_j with intensities lambda_j.
/// The squared nu-norm of a per-mark vector u is sum_j lambda_j * u_j^2.
class JumpMeasure {
 public:
  JumpMeasure() = default;
  JumpMeasure(std::vector<double> marks, std::vector<double> intensities);

  std::size_t mark_count() const { return marks_.size(); }
  double mark(std::size_t j) const { return marks_[j]; }
  double intensity(std::size_t j) const { return intensities_[j]; }
  double total_intensity() const { return total_; }

  double norm_sq(const std::vector<double>& u) const;
  double norm(const std::vector<double>& u) const;

 private:
  std::vector<double> marks_;
  std::vector<double> intensities_;
  double total_ = 0.0;
};

}  // namespace mfr
