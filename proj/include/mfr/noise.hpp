#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mfr/grid.hpp"

namespace mfr {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// Every 128-bit block is a pure function of (key, counter), so draws
// addressed by (seed, particle, step, channel, draw) are reproducible
// regardless of evaluation order or thread count.
namespace philox {

std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                   const std::array<std::uint32_t, 2>& key);

/// Two uniforms in (0,1) from one block.
std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint32_t particle, std::uint32_t step,
                                   std::uint32_t channel, std::uint32_t draw);

}  // namespace philox

/// Derives an independent 64-bit seed for a sub-experiment (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Discretized driving noises for a family of particles: Gaussian increments
/// dB ~ N(0, dt) and per-mark Poisson counts with mean lambda_j * dt, one
/// independent stream per particle.
class NoiseBundle {
 public:
  NoiseBundle() = default;

  /// Bundle built from explicit increment arrays (replay, cross-checks).
  /// db is [particle * steps + step]; counts is
  /// [(particle * steps + step) * marks + mark].
  static NoiseBundle from_arrays(const TimeGrid& grid, const JumpMeasure& nu,
                                 std::vector<double> db, std::vector<std::uint32_t> counts,
                                 std::uint64_t seed = 0);

  std::size_t particles() const { return n_; }
  const TimeGrid& grid() const { return grid_; }
  const JumpMeasure& jumps() const { return nu_; }
  std::uint64_t seed() const { return seed_; }

  double brownian_increment(std::size_t i, std::size_t k) const { return db_[i * steps_ + k]; }
  std::uint32_t jump_count(std::size_t i, std::size_t k, std::size_t j) const {
    return counts_[(i * steps_ + k) * marks_ + j];
  }
  /// Compensated count increment: count - lambda_j * dt.
  double compensated_increment(std::size_t i, std::size_t k, std::size_t j) const;
  bool any_jump(std::size_t i, std::size_t k) const;

  /// Brownian value at node k (prefix sum of increments).
  double brownian_at(std::size_t i, std::size_t k) const;
  /// Compensated counting process for mark j at node k.
  double compensated_at(std::size_t i, std::size_t k, std::size_t j) const;

  /// Bundle with particle i relabelled to position perm[i].
  NoiseBundle permuted(const std::vector<std::size_t>& perm) const;

  friend NoiseBundle simulate_noise(const TimeGrid& grid, const JumpMeasure& nu,
                                    std::size_t n_particles, std::uint64_t seed);

 private:
  TimeGrid grid_{1.0, 1};
  JumpMeasure nu_;
  std::size_t n_ = 0;
  std::size_t steps_ = 0;
  std::size_t marks_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> db_;             // [particle * steps + step]
  std::vector<std::uint32_t> counts_;  // [(particle * steps + step) * marks + mark]
};

NoiseBundle simulate_noise(const TimeGrid& grid, const JumpMeasure& nu, std::size_t n_particles,
                           std::uint64_t seed);

/// Averages of terminal compensated sums across particles; each entry tends
/// to 0 at rate O(1/sqrt(particles)) when the compensator is correct.
struct MartingaleResiduals {
  double brownian = 0.0;
  std::vector<double> per_mark;
};
MartingaleResiduals martingale_check(const NoiseBundle& noise);

/// Flat CSV dump, one row per (particle, step): particle, step, dB, count_1..count_m.
void write_noise_csv(const NoiseBundle& noise, const std::string& path);

}  // namespace mfr
