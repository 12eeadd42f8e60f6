#pragma once

#include <cstdint>
#include <string>

#include "mfr/chaos.hpp"
#include "mfr/coefficients.hpp"
#include "mfr/errors.hpp"
#include "mfr/grid.hpp"
#include "mfr/particles.hpp"
#include "mfr/regression.hpp"

namespace mfr {

/// Malformed scenario file; `line` is 1-based (0 = file-level problem).
class ConfigError : public ParameterError {
 public:
  ConfigError(const std::string& what, std::size_t line_no)
      : ParameterError(what), line(line_no) {}
  std::size_t line = 0;
};

/// A fully assembled experiment description. The file format is flat
/// `key = value` text with '#' comments; unknown keys are rejected with the
/// offending line number. The accepted key set is documented in the README.
struct Scenario {
  TimeGrid grid{1.0, 100};
  JumpMeasure nu;
  CoefficientSet coeffs;
  RegressionSpec reg;
  std::size_t particles = 100;  // n for the particle system
  std::size_t samples = 1000;   // Monte Carlo streams for the limit solve
  std::uint64_t seed = 1;
  PicardOptions picard;
  ParticleOptions particle_opts;
  double kappa = 0.0;  // chaos_full moment split (0 = not set)
  ChaosParams chaos;
  double jump_threshold = 1e-6;

  std::string driver_name = "zero";
  std::string obstacle_name = "none";
  std::string terminal_name = "constant";
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// FNV-1a hash of the configuration text, as 16 hex digits.
std::string config_hash_hex(const std::string& text);

}  // namespace mfr
