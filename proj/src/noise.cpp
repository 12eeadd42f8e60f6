#include "mfr/noise.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "mfr/errors.hpp"

namespace mfr {

namespace philox {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  key[0] += kWeyl0;
  key[1] += kWeyl1;
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  // 53 significant bits, offset by half an ulp to stay inside (0,1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                   const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> ctr = counter;
  std::array<std::uint32_t, 2> k = key;
  for (int r = 0; r < 10; ++r) round_once(ctr, k);
  return ctr;
}

std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint32_t particle, std::uint32_t step,
                                   std::uint32_t channel, std::uint32_t draw) {
  const std::array<std::uint32_t, 4> ctr = {particle, step, channel, draw};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const auto out = block(ctr, key);
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

}  // namespace philox

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

namespace {

double gaussian_draw(std::uint64_t seed, std::uint32_t particle, std::uint32_t step) {
  const auto u = philox::uniform_pair(seed, particle, step, /*channel=*/0, /*draw=*/0);
  return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
}

// Knuth's product method; exact for the modest lambda*dt this artifact uses.
std::uint32_t poisson_draw(double mean, std::uint64_t seed, std::uint32_t particle,
                           std::uint32_t step, std::uint32_t channel) {
  const double limit = std::exp(-mean);
  double prod = 1.0;
  std::uint32_t count = 0;
  std::uint32_t draw = 0;
  double cached = -1.0;
  while (true) {
    double u;
    if (cached >= 0.0) {
      u = cached;
      cached = -1.0;
    } else {
      const auto pair = philox::uniform_pair(seed, particle, step, channel, draw++);
      u = pair[0];
      cached = pair[1];
    }
    prod *= u;
    if (prod <= limit) return count;
    ++count;
  }
}

}  // namespace

NoiseBundle NoiseBundle::from_arrays(const TimeGrid& grid, const JumpMeasure& nu,
                                     std::vector<double> db, std::vector<std::uint32_t> counts,
                                     std::uint64_t seed) {
  NoiseBundle b;
  b.grid_ = grid;
  b.nu_ = nu;
  b.steps_ = grid.steps();
  b.marks_ = nu.mark_count();
  if (db.empty() || db.size() % b.steps_ != 0)
    throw ParameterError("NoiseBundle: increment array not a whole number of particles");
  b.n_ = db.size() / b.steps_;
  if (counts.size() != b.n_ * b.steps_ * b.marks_)
    throw ParameterError("NoiseBundle: count array size mismatch");
  b.seed_ = seed;
  b.db_ = std::move(db);
  b.counts_ = std::move(counts);
  return b;
}

double NoiseBundle::compensated_increment(std::size_t i, std::size_t k, std::size_t j) const {
  return static_cast<double>(jump_count(i, k, j)) - nu_.intensity(j) * grid_.dt();
}

bool NoiseBundle::any_jump(std::size_t i, std::size_t k) const {
  for (std::size_t j = 0; j < marks_; ++j)
    if (jump_count(i, k, j) > 0) return true;
  return false;
}

double NoiseBundle::brownian_at(std::size_t i, std::size_t k) const {
  double b = 0.0;
  for (std::size_t s = 0; s < k; ++s) b += brownian_increment(i, s);
  return b;
}

double NoiseBundle::compensated_at(std::size_t i, std::size_t k, std::size_t j) const {
  double v = 0.0;
  for (std::size_t s = 0; s < k; ++s) v += compensated_increment(i, s, j);
  return v;
}

NoiseBundle NoiseBundle::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != n_) throw ParameterError("NoiseBundle: permutation size mismatch");
  NoiseBundle out = *this;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t dst = perm[i];
    if (dst >= n_) throw ParameterError("NoiseBundle: permutation index out of range");
    for (std::size_t k = 0; k < steps_; ++k) {
      out.db_[dst * steps_ + k] = db_[i * steps_ + k];
      for (std::size_t j = 0; j < marks_; ++j)
        out.counts_[(dst * steps_ + k) * marks_ + j] = counts_[(i * steps_ + k) * marks_ + j];
    }
  }
  return out;
}

NoiseBundle simulate_noise(const TimeGrid& grid, const JumpMeasure& nu, std::size_t n_particles,
                           std::uint64_t seed) {
  if (n_particles == 0) throw ParameterError("simulate_noise: need at least one particle");
  NoiseBundle b;
  b.grid_ = grid;
  b.nu_ = nu;
  b.n_ = n_particles;
  b.steps_ = grid.steps();
  b.marks_ = nu.mark_count();
  b.seed_ = seed;
  b.db_.resize(n_particles * b.steps_);
  b.counts_.resize(n_particles * b.steps_ * b.marks_);
  const double sdt = std::sqrt(grid.dt());
  for (std::size_t i = 0; i < n_particles; ++i) {
    const auto pid = static_cast<std::uint32_t>(i);
    for (std::size_t k = 0; k < b.steps_; ++k) {
      const auto sid = static_cast<std::uint32_t>(k);
      b.db_[i * b.steps_ + k] = sdt * gaussian_draw(seed, pid, sid);
      for (std::size_t j = 0; j < b.marks_; ++j) {
        const double mean = nu.intensity(j) * grid.dt();
        b.counts_[(i * b.steps_ + k) * b.marks_ + j] =
            poisson_draw(mean, seed, pid, sid, static_cast<std::uint32_t>(1 + j));
      }
    }
  }
  return b;
}

MartingaleResiduals martingale_check(const NoiseBundle& noise) {
  MartingaleResiduals r;
  const std::size_t n = noise.particles();
  const std::size_t steps = noise.grid().steps();
  const std::size_t m = noise.jumps().mark_count();
  r.per_mark.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double total_db = 0.0;
    for (std::size_t k = 0; k < steps; ++k) total_db += noise.brownian_increment(i, k);
    r.brownian += total_db;
    for (std::size_t j = 0; j < m; ++j) r.per_mark[j] += noise.compensated_at(i, steps, j);
  }
  r.brownian /= static_cast<double>(n);
  for (double& v : r.per_mark) v /= static_cast<double>(n);
  return r;
}

void write_noise_csv(const NoiseBundle& noise, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ParameterError("write_noise_csv: cannot open " + path);
  const std::size_t m = noise.jumps().mark_count();
  std::fprintf(f, "particle,step,dB");
  for (std::size_t j = 0; j < m; ++j) std::fprintf(f, ",count_%zu", j + 1);
  std::fprintf(f, "\n");
  for (std::size_t i = 0; i < noise.particles(); ++i)
    for (std::size_t k = 0; k < noise.grid().steps(); ++k) {
      std::fprintf(f, "%zu,%zu,%.17g", i, k, noise.brownian_increment(i, k));
      for (std::size_t j = 0; j < m; ++j) std::fprintf(f, ",%u", noise.jump_count(i, k, j));
      std::fprintf(f, "\n");
    }
  std::fclose(f);
}

}  // namespace mfr
