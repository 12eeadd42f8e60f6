#include "mfr/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfr/errors.hpp"

namespace mfr {

namespace {

// Exponent tuples of total degree 1..degree over `vars` variables.
void enumerate_exponents(std::size_t vars, std::size_t degree, std::vector<unsigned>& current,
                         std::size_t var, std::size_t remaining,
                         std::vector<std::vector<unsigned>>& out) {
  if (var == vars) {
    if (remaining < degree) out.push_back(current);  // excludes the all-zero tuple
    return;
  }
  for (unsigned e = 0; e <= remaining; ++e) {
    current[var] = e;
    enumerate_exponents(vars, degree, current, var + 1, remaining - e, out);
  }
  current[var] = 0;
}

// In-place Cholesky of a symmetric positive definite matrix (row-major).
bool cholesky(std::vector<double>& a, std::size_t q) {
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * q + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * q + k] * a[j * q + k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        a[i * q + i] = std::sqrt(s);
      } else {
        a[i * q + j] = s / a[j * q + j];
      }
    }
  }
  return true;
}

void chol_solve(const std::vector<double>& l, std::size_t q, std::vector<double>& b) {
  for (std::size_t i = 0; i < q; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * q + k] * b[k];
    b[i] = s / l[i * q + i];
  }
  for (std::size_t i = q; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < q; ++k) s -= l[k * q + i] * b[k];
    b[i] = s / l[i * q + i];
  }
}

}  // namespace

NodeRegression::NodeRegression(const std::vector<double>& states, std::size_t n_samples,
                               std::size_t n_vars, const RegressionSpec& spec)
    : n_(n_samples), vars_(n_vars), states_(&states) {
  if (states.size() != n_samples * n_vars) throw ParameterError("NodeRegression: state size mismatch");
  if (n_samples == 0) throw ParameterError("NodeRegression: no samples");

  state_order_.resize(n_);
  std::iota(state_order_.begin(), state_order_.end(), std::size_t{0});
  std::sort(state_order_.begin(), state_order_.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t v = 0; v < vars_; ++v) {
      const double xa = states[a * vars_ + v], xb = states[b * vars_ + v];
      if (xa != xb) return xa < xb;
    }
    return false;
  });

  if (spec.basis == RegressionSpec::Basis::constant || spec.degree == 0) return;

  // standardize, dropping variables with no spread
  for (std::size_t v = 0; v < vars_; ++v) {
    double mean = 0.0;
    for (std::size_t r : state_order_) mean += states[r * vars_ + v];
    mean /= static_cast<double>(n_);
    double var = 0.0;
    for (std::size_t r : state_order_) {
      const double d = states[r * vars_ + v] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n_);
    const double sd = std::sqrt(var);
    if (sd > 1e-13 * (1.0 + std::abs(mean))) {
      active_.push_back(v);
      shift_.push_back(mean);
      scale_.push_back(sd);
    }
  }
  if (active_.empty()) return;  // degenerate state: constant fit

  std::vector<unsigned> current(active_.size(), 0);
  enumerate_exponents(active_.size(), spec.degree, current, 0, spec.degree, exponents_);
  if (n_ <= exponents_.size()) {  // underdetermined outright
    exponents_.clear();
    active_.clear();
    rank_warning_ = true;
    return;
  }

  const std::size_t q = exponents_.size() + 1;
  std::vector<double> gram(q * q, 0.0);
  std::vector<double> row(q);
  for (std::size_t r : state_order_) {
    row[0] = 1.0;
    for (std::size_t t = 0; t < exponents_.size(); ++t) row[t + 1] = basis_value(r, t);
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j <= i; ++j) gram[i * q + j] += row[i] * row[j];
  }
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i + 1; j < q; ++j) gram[i * q + j] = gram[j * q + i];
  const double scale = static_cast<double>(n_);
  for (auto& g : gram) g /= scale;

  double ridge = spec.ridge;
  for (int attempt = 0; attempt < 4; ++attempt) {
    chol_ = gram;
    for (std::size_t i = 1; i < q; ++i) chol_[i * q + i] += ridge;  // intercept unpenalized
    if (cholesky(chol_, q)) {
      factor_ok_ = true;
      return;
    }
    ridge = std::max(ridge * 100.0, 1e-12);
  }
  rank_warning_ = true;
  active_.clear();
  exponents_.clear();
}

double NodeRegression::basis_value(std::size_t sample, std::size_t term) const {
  double v = 1.0;
  const auto& exps = exponents_[term];
  for (std::size_t a = 0; a < active_.size(); ++a) {
    const double x = ((*states_)[sample * vars_ + active_[a]] - shift_[a]) / scale_[a];
    for (unsigned e = 0; e < exps[a]; ++e) v *= x;
  }
  return v;
}

NodeRegression::Fit NodeRegression::fit(const std::vector<double>& target) const {
  if (target.size() != n_) throw ParameterError("NodeRegression: target size mismatch");
  Fit out;
  if (exponents_.empty() || !factor_ok_) {
    // canonical-order sample mean
    std::vector<std::size_t> order = state_order_;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return target[a] < target[b]; });
    double mean = 0.0;
    for (std::size_t r : order) mean += target[r];
    mean /= static_cast<double>(n_);
    out.fitted.assign(n_, mean);
    out.fallback = true;
    out.warning = rank_warning_;
    return out;
  }

  const std::size_t q = exponents_.size() + 1;
  // canonical order refined by the target value so that ties in the state
  // accumulate deterministically under relabelling
  std::vector<std::size_t> order = state_order_;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t v = 0; v < vars_; ++v) {
      const double xa = (*states_)[a * vars_ + v], xb = (*states_)[b * vars_ + v];
      if (xa != xb) return xa < xb;
    }
    return target[a] < target[b];
  });

  std::vector<double> rhs(q, 0.0);
  for (std::size_t r : order) {
    rhs[0] += target[r];
    for (std::size_t t = 0; t < exponents_.size(); ++t) rhs[t + 1] += basis_value(r, t) * target[r];
  }
  for (auto& v : rhs) v /= static_cast<double>(n_);
  chol_solve(chol_, q, rhs);

  out.fitted.resize(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    double v = rhs[0];
    for (std::size_t t = 0; t < exponents_.size(); ++t) v += rhs[t + 1] * basis_value(r, t);
    out.fitted[r] = v;
  }
  return out;
}

}  // namespace mfr
