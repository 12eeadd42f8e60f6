#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mfr {

/// Invalid argument to an operation (bad sizes, out-of-range parameters).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver declined to run because a precondition it relies on fails
/// (contraction conditions, terminal-condition violations, ...).
class RefusedError : public std::runtime_error {
 public:
  explicit RefusedError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solve did not converge within its iteration budget.
/// Carries the per-iteration deltas observed so far.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), deltas(std::move(trace)) {}
  std::vector<double> deltas;
};

}  // namespace mfr
