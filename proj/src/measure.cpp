#include "mfr/measure.hpp"

#include <algorithm>
#include <cmath>

#include "mfr/errors.hpp"

namespace mfr {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw ParameterError("EmpiricalMeasure: needs at least one sample");
  std::sort(samples_.begin(), samples_.end());
  double s = 0.0;
  for (double x : samples_) {
    if (!std::isfinite(x)) throw ParameterError("EmpiricalMeasure: non-finite sample");
    s += x;
  }
  mean_ = s / static_cast<double>(samples_.size());
}

EmpiricalMeasure EmpiricalMeasure::point_mass(double v, std::size_t count) {
  if (count == 0) throw ParameterError("EmpiricalMeasure: point mass needs count >= 1");
  return EmpiricalMeasure(std::vector<double>(count, v));
}

double EmpiricalMeasure::abs_moment(double p) const {
  double s = 0.0;
  for (double x : samples_) s += std::pow(std::abs(x), p);
  return s / static_cast<double>(samples_.size());
}

double EmpiricalMeasure::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw ParameterError("EmpiricalMeasure: quantile level outside [0,1]");
  const std::size_t m = samples_.size();
  std::size_t idx = static_cast<std::size_t>(u * static_cast<double>(m));
  if (idx >= m) idx = m - 1;
  return samples_[idx];
}

MeasureFlow::MeasureFlow(std::vector<EmpiricalMeasure> per_node) : per_node_(std::move(per_node)) {
  if (per_node_.empty()) throw ParameterError("MeasureFlow: empty flow");
  const std::size_t m = per_node_[0].size();
  for (const auto& nu : per_node_)
    if (nu.size() != m) throw ParameterError("MeasureFlow: unequal sample counts across nodes");
}

MeasureFlow MeasureFlow::point_mass(double v, std::size_t nodes, std::size_t count) {
  std::vector<EmpiricalMeasure> per(nodes, EmpiricalMeasure::point_mass(v, count));
  return MeasureFlow(std::move(per));
}

}  // namespace mfr
