#pragma once

#include <cstddef>
#include <vector>

namespace mfr {

struct RegressionSpec {
  enum class Basis { constant, polynomial };
  Basis basis = Basis::polynomial;
  std::size_t degree = 3;
  double ridge = 1e-8;
};

/// Least-squares estimator of a conditional expectation at one time node:
/// fits targets against a polynomial basis in the state variables across
/// samples. All cross-sample accumulations run in a canonical order (sorted
/// by state row, then target value), so the fitted values are equivariant
/// under sample relabelling bit for bit.
///
/// Zero-variance state variables are dropped from the basis (a fully
/// degenerate state, e.g. at t = 0, reduces to the sample mean). The ridge
/// penalty never applies to the intercept, so fitted values preserve the
/// sample mean of the target exactly. A Gram matrix that stays numerically
/// rank-deficient after ridge escalation falls back to the sample mean and
/// raises the warning flag.
class NodeRegression {
 public:
  /// states: row-major [sample * n_vars + var].
  NodeRegression(const std::vector<double>& states, std::size_t n_samples, std::size_t n_vars,
                 const RegressionSpec& spec);

  struct Fit {
    std::vector<double> fitted;
    bool fallback = false;  // constant fit used
    bool warning = false;   // fallback was forced by rank deficiency
  };

  Fit fit(const std::vector<double>& target) const;

  std::size_t basis_size() const { return exponents_.size() + 1; }

 private:
  double basis_value(std::size_t sample, std::size_t term) const;

  std::size_t n_ = 0;
  std::size_t vars_ = 0;
  const std::vector<double>* states_ = nullptr;
  std::vector<std::size_t> active_;              // variables with spread
  std::vector<double> shift_, scale_;            // standardization per active var
  std::vector<std::vector<unsigned>> exponents_; // non-constant basis terms
  std::vector<std::size_t> state_order_;         // canonical sample order
  std::vector<double> chol_;                     // Cholesky factor of the Gram matrix
  bool factor_ok_ = false;
  bool rank_warning_ = false;
};

}  // namespace mfr
