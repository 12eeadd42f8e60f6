#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mfr/grid.hpp"
#include "mfr/measure.hpp"

namespace mfr {

/// Markov state of one particle at a grid node: time, Brownian value and the
/// per-mark compensated counting processes. Path-dependent coefficients are
/// supported exactly when they factor through this state.
struct MarkovState {
  double t = 0.0;
  double brownian = 0.0;
  std::vector<double> compensated;  // per mark
};

using Driver = std::function<double(const MarkovState& s, double y, double z,
                                    const std::vector<double>& u, const EmpiricalMeasure& mu)>;
using Obstacle =
    std::function<double(const MarkovState& s, double y, const EmpiricalMeasure& mu)>;
using Terminal = std::function<double(const MarkovState& terminal_state)>;

/// Driver f, obstacle h and terminal xi with their declared Lipschitz
/// constants and the jump measure they are defined against.
struct CoefficientSet {
  Driver driver;
  Obstacle obstacle;
  Terminal terminal;

  double lipschitz_f = 0.0;  // C_f: Lipschitz in (y, z, u, mu) jointly
  double gamma1 = 0.0;       // obstacle Lipschitz in y
  double gamma2 = 0.0;       // obstacle Lipschitz in the measure
  double p = 2.0;            // moment order, >= 2

  /// Driver declared to satisfy the jump-comparison condition (monotone in u
  /// against kernels bounded below by -1). Declared, not machine-checked;
  /// each builtin documents why it holds.
  bool comparison_flag = false;

  /// Obstacle declared separable as (time path term) + kappa(y, mu) with the
  /// time term left-upper-semicontinuous (no predictable downward jumps).
  bool obstacle_separable_lusc = false;
};

/// Builtins addressable from scenario files. Parameters are validated
/// against the names each builtin declares.
using ParamMap = std::map<std::string, double>;

struct BuiltinInfo {
  std::string name;
  std::vector<std::string> params;  // accepted parameter names
};

std::vector<BuiltinInfo> builtin_drivers();
std::vector<BuiltinInfo> builtin_obstacles();
std::vector<BuiltinInfo> builtin_terminals();

/// Construct a builtin; throws ParameterError on unknown name/params.
/// Fills the relevant Lipschitz fields of `out` and the declaration flags.
void make_driver(const std::string& name, const ParamMap& params, const JumpMeasure& nu,
                 CoefficientSet& out);
void make_obstacle(const std::string& name, const ParamMap& params, const TimeGrid& grid,
                   CoefficientSet& out);
void make_terminal(const std::string& name, const ParamMap& params, CoefficientSet& out);

}  // namespace mfr
