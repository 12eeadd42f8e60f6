#include "mfr/lln.hpp"

#include <cmath>
#include <cstdio>

#include "mfr/errors.hpp"
#include "mfr/noise.hpp"

namespace mfr {

namespace {

class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t id)
      : seed_(seed), lo_(static_cast<std::uint32_t>(id)), hi_(static_cast<std::uint32_t>(id >> 32)) {}

  double next() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    const auto u = philox::uniform_pair(seed_, lo_, hi_, 0xFFFFFFFFu, draw_++);
    cached_ = u[1];
    have_ = true;
    return u[0];
  }

  std::size_t next_index(std::size_t bound) {
    return std::min<std::size_t>(bound - 1, static_cast<std::size_t>(next() * static_cast<double>(bound)));
  }

 private:
  std::uint64_t seed_;
  std::uint32_t lo_, hi_;
  std::uint32_t draw_ = 0;
  double cached_ = 0.0;
  bool have_ = false;
};

std::vector<std::size_t> subsample_indices(std::size_t pool, std::size_t n, UniformStream& u) {
  std::vector<std::size_t> idx(pool);
  for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + u.next_index(pool - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace

void write_decay_csv(const DecayTable& table, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ParameterError("write_decay_csv: cannot open " + path);
  std::fprintf(f, "n,mean,stderr,bound\n");
  for (const auto& r : table.rows)
    std::fprintf(f, "%zu,%.17g,%.17g,%.17g\n", r.n, r.mean, r.std_error, r.bound);
  std::fclose(f);
}

LlnDiagnostic lln_diagnostic(const std::vector<PathSample>& pool,
                             const std::vector<PathSample>& reference, double p,
                             const std::vector<std::size_t>& n_list, std::size_t reps,
                             std::uint64_t seed, const AlignmentSearch& search) {
  if (pool.empty() || reference.empty()) throw ParameterError("lln_diagnostic: empty inputs");
  if (reps == 0) throw ParameterError("lln_diagnostic: needs reps >= 1");
  for (std::size_t n : n_list)
    if (n == 0 || n > pool.size() || n > reference.size())
      throw ParameterError("lln_diagnostic: n outside pool/reference size");

  const std::size_t last = reference[0].nodes() - 1;
  double ref_moment = 0.0;  // (1/M) sum sup|y|^p == D_T^o(P, delta_0)^p for the proxy
  for (const auto& y : reference) ref_moment += std::pow(y.sup_abs_to(last), p);
  ref_moment /= static_cast<double>(reference.size());
  const double bound = std::pow(2.0, p) * ref_moment;

  LlnDiagnostic out;
  out.matched.coupling = "matched";
  out.product.coupling = "product";
  for (std::size_t n : n_list) {
    std::vector<double> est_matched, est_product;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      UniformStream stream(derive_seed(seed, n, rep), 0);
      const auto ix = subsample_indices(pool.size(), n, stream);
      const auto iy = subsample_indices(reference.size(), n, stream);
      std::vector<PathSample> xs, ys;
      xs.reserve(n);
      ys.reserve(n);
      for (std::size_t i : ix) xs.push_back(pool[i]);
      for (std::size_t j : iy) ys.push_back(reference[j]);
      const auto d = path_wasserstein_skorohod(xs, ys, p, search);
      est_matched.push_back(std::pow(d.value, p));
      // independent-product value: mean of d^o(x, y)^p over pairs
      const std::size_t pair_budget = 512;
      double acc = 0.0;
      std::size_t used = 0;
      if (n * n <= pair_budget) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) acc += std::pow(skorohod_do(xs[i], ys[j], search), p);
        used = n * n;
      } else {
        for (std::size_t s = 0; s < pair_budget; ++s) {
          const std::size_t i = stream.next_index(n);
          const std::size_t j = stream.next_index(n);
          acc += std::pow(skorohod_do(xs[i], ys[j], search), p);
        }
        used = pair_budget;
      }
      est_product.push_back(acc / static_cast<double>(used));
    }
    auto summarize = [&](const std::vector<double>& est) {
      DecayRow row;
      row.n = n;
      row.bound = bound;
      double m = 0.0;
      for (double e : est) m += e;
      m /= static_cast<double>(est.size());
      row.mean = m;
      double var = 0.0;
      for (double e : est) var += (e - m) * (e - m);
      if (est.size() > 1) var /= static_cast<double>(est.size() - 1);
      row.std_error = std::sqrt(var / static_cast<double>(est.size()));
      return row;
    };
    out.matched.rows.push_back(summarize(est_matched));
    out.product.rows.push_back(summarize(est_product));
  }
  return out;
}

}  // namespace mfr
