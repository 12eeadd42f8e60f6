#include "mfr/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mfr/errors.hpp"

namespace mfr {

namespace {

// Reads declared parameters with defaults and rejects unknown keys.
class ParamReader {
 public:
  ParamReader(std::string owner, const ParamMap& params) : owner_(std::move(owner)), params_(params) {}

  double get(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  void finish() const {
    for (const auto& [key, value] : params_)
      if (!used_.count(key))
        throw ParameterError(owner_ + ": unknown parameter '" + key + "'");
  }

 private:
  std::string owner_;
  const ParamMap& params_;
  std::set<std::string> used_;
};

double weighted_sum(const std::vector<double>& u, const JumpMeasure& nu) {
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += nu.intensity(j) * u[j];
  return s;
}

double compensated_total(const MarkovState& s) {
  double v = 0.0;
  for (double c : s.compensated) v += c;
  return v;
}

constexpr double kNoObstacle = -1e9;

}  // namespace

std::vector<BuiltinInfo> builtin_drivers() {
  return {{"zero", {}},
          {"linear_mean", {"a"}},
          {"linear_y", {"a"}},
          {"affine", {"ay", "az", "au", "amean", "c0"}}};
}

std::vector<BuiltinInfo> builtin_obstacles() {
  return {{"none", {}},
          {"affine_mean", {"g1", "g2", "c0"}},
          {"step_mean", {"g1", "g2", "level", "frac", "c0"}},
          {"ramp_mean", {"g1", "g2", "level", "frac", "c0"}},
          {"poisson_path_mean", {"g1", "g2", "jscale", "c0"}}};
}

std::vector<BuiltinInfo> builtin_terminals() {
  return {{"constant", {"value"}},
          {"brownian", {"offset", "scale"}},
          {"compensated_poisson", {"offset", "scale"}},
          {"bounded_mix", {"offset", "scale", "bscale", "jscale"}}};
}

void make_driver(const std::string& name, const ParamMap& params, const JumpMeasure& nu,
                 CoefficientSet& out) {
  ParamReader r("driver " + name, params);
  if (name == "zero") {
    out.driver = [](const MarkovState&, double, double, const std::vector<double>&,
                    const EmpiricalMeasure&) { return 0.0; };
    out.lipschitz_f = 0.0;
    out.comparison_flag = true;  // constant in u
  } else if (name == "linear_mean") {
    const double a = r.get("a", 0.0);
    out.driver = [a](const MarkovState&, double, double, const std::vector<double>&,
                     const EmpiricalMeasure& mu) { return a * mu.mean(); };
    // |mean(mu) - mean(nu)| <= W_1 <= W_p
    out.lipschitz_f = std::abs(a);
    out.comparison_flag = true;  // constant in u
  } else if (name == "linear_y") {
    const double a = r.get("a", 0.0);
    out.driver = [a](const MarkovState&, double y, double, const std::vector<double>&,
                     const EmpiricalMeasure&) { return a * y; };
    out.lipschitz_f = std::abs(a);
    out.comparison_flag = true;  // constant in u
  } else if (name == "affine") {
    const double ay = r.get("ay", 0.0);
    const double az = r.get("az", 0.0);
    const double au = r.get("au", 0.0);
    const double amean = r.get("amean", 0.0);
    const double c0 = r.get("c0", 0.0);
    auto nu_copy = nu;
    out.driver = [ay, az, au, amean, c0, nu_copy](const MarkovState&, double y, double z,
                                                  const std::vector<double>& u,
                                                  const EmpiricalMeasure& mu) {
      return ay * y + az * z + au * weighted_sum(u, nu_copy) + amean * mu.mean() + c0;
    };
    // |au * sum_j lambda_j du_j| <= |au| sqrt(total intensity) |du|_nu
    const double u_lip = std::abs(au) * std::sqrt(nu.total_intensity());
    out.lipschitz_f = std::max({std::abs(ay), std::abs(az), u_lip, std::abs(amean)});
    // Linear in u with kernel gamma_j = au, so the comparison condition holds
    // exactly when au >= -1.
    out.comparison_flag = au >= -1.0;
  } else {
    throw ParameterError("unknown driver '" + name + "'");
  }
  r.finish();
}

void make_obstacle(const std::string& name, const ParamMap& params, const TimeGrid& grid,
                   CoefficientSet& out) {
  ParamReader r("obstacle " + name, params);
  if (name == "none") {
    out.obstacle = [](const MarkovState&, double, const EmpiricalMeasure&) { return kNoObstacle; };
    out.gamma1 = 0.0;
    out.gamma2 = 0.0;
    out.obstacle_separable_lusc = true;
  } else if (name == "affine_mean") {
    const double g1 = r.get("g1", 0.0);
    const double g2 = r.get("g2", 0.0);
    const double c0 = r.get("c0", 0.0);
    out.obstacle = [g1, g2, c0](const MarkovState&, double y, const EmpiricalMeasure& mu) {
      return g1 * y + g2 * mu.mean() + c0;
    };
    out.gamma1 = std::abs(g1);
    out.gamma2 = std::abs(g2);
    out.obstacle_separable_lusc = true;
  } else if (name == "step_mean") {
    const double g1 = r.get("g1", 0.0);
    const double g2 = r.get("g2", 0.0);
    const double level = r.get("level", 0.0);
    const double cutoff = r.get("frac", 0.5) * grid.horizon();
    const double c0 = r.get("c0", 0.0);
    // value at the cutoff node is the right limit
    out.obstacle = [g1, g2, level, cutoff, c0](const MarkovState& s, double y,
                                               const EmpiricalMeasure& mu) {
      return g1 * y + g2 * mu.mean() + c0 + (s.t < cutoff ? level : 0.0);
    };
    out.gamma1 = std::abs(g1);
    out.gamma2 = std::abs(g2);
    out.obstacle_separable_lusc = level <= 0.0;  // a drop at the cutoff is a predictable down-jump
  } else if (name == "ramp_mean") {
    const double g1 = r.get("g1", 0.0);
    const double g2 = r.get("g2", 0.0);
    const double level = r.get("level", 0.0);
    const double cutoff = r.get("frac", 0.6) * grid.horizon();
    const double c0 = r.get("c0", 0.0);
    out.obstacle = [g1, g2, level, cutoff, c0](const MarkovState& s, double y,
                                               const EmpiricalMeasure& mu) {
      const double ramp = cutoff > 0.0 ? std::max(0.0, 1.0 - s.t / cutoff) : 0.0;
      return g1 * y + g2 * mu.mean() + c0 + level * ramp;
    };
    out.gamma1 = std::abs(g1);
    out.gamma2 = std::abs(g2);
    out.obstacle_separable_lusc = true;  // continuous time term
  } else if (name == "poisson_path_mean") {
    const double g1 = r.get("g1", 0.0);
    const double g2 = r.get("g2", 0.0);
    const double jscale = r.get("jscale", 0.0);
    const double c0 = r.get("c0", 0.0);
    out.obstacle = [g1, g2, jscale, c0](const MarkovState& s, double y,
                                        const EmpiricalMeasure& mu) {
      return g1 * y + g2 * mu.mean() + c0 + jscale * compensated_total(s);
    };
    out.gamma1 = std::abs(g1);
    out.gamma2 = std::abs(g2);
    out.obstacle_separable_lusc = true;  // time term jumps only at Poisson events
  } else {
    throw ParameterError("unknown obstacle '" + name + "'");
  }
  r.finish();
}

void make_terminal(const std::string& name, const ParamMap& params, CoefficientSet& out) {
  ParamReader r("terminal " + name, params);
  if (name == "constant") {
    const double v = r.get("value", 0.0);
    out.terminal = [v](const MarkovState&) { return v; };
  } else if (name == "brownian") {
    const double offset = r.get("offset", 0.0);
    const double scale = r.get("scale", 1.0);
    out.terminal = [offset, scale](const MarkovState& s) { return offset + scale * s.brownian; };
  } else if (name == "compensated_poisson") {
    const double offset = r.get("offset", 0.0);
    const double scale = r.get("scale", 1.0);
    out.terminal = [offset, scale](const MarkovState& s) {
      return offset + scale * compensated_total(s);
    };
  } else if (name == "bounded_mix") {
    const double offset = r.get("offset", 0.0);
    const double scale = r.get("scale", 1.0);
    const double bscale = r.get("bscale", 1.0);
    const double jscale = r.get("jscale", 0.0);
    out.terminal = [offset, scale, bscale, jscale](const MarkovState& s) {
      return offset + scale * std::tanh(bscale * s.brownian + jscale * compensated_total(s));
    };
  } else {
    throw ParameterError("unknown terminal '" + name + "'");
  }
  r.finish();
}

}  // namespace mfr
