#include "mfr/grid.hpp"

#include <cmath>

#include "mfr/errors.hpp"

namespace mfr {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0)) throw ParameterError("TimeGrid: horizon must be > 0");
  if (steps == 0) throw ParameterError("TimeGrid: step count must be >= 1");
  dt_ = horizon_ / static_cast<double>(steps_);
}

JumpMeasure::JumpMeasure(std::vector<double> marks, std::vector<double> intensities)
    : marks_(std::move(marks)), intensities_(std::move(intensities)) {
  if (marks_.size() != intensities_.size())
    throw ParameterError("JumpMeasure: marks/intensities size mismatch");
  for (double e : marks_)
    if (e == 0.0) throw ParameterError("JumpMeasure: marks must be nonzero");
  for (double lam : intensities_) {
    if (!(lam > 0.0)) throw ParameterError("JumpMeasure: intensities must be > 0");
    total_ += lam;
  }
  if (!std::isfinite(total_)) throw ParameterError("JumpMeasure: total intensity not finite");
}

double JumpMeasure::norm_sq(const std::vector<double>& u) const {
  if (u.size() != intensities_.size())
    throw ParameterError("JumpMeasure: vector size does not match mark count");
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += intensities_[j] * u[j] * u[j];
  return s;
}

double JumpMeasure::norm(const std::vector<double>& u) const { return std::sqrt(norm_sq(u)); }

}  // namespace mfr
