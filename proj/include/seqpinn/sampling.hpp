#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "seqpinn/errors.hpp"
#include "seqpinn/problems.hpp"
#include "seqpinn/rng.hpp"

namespace seqpinn {

enum class SamplingMode { latin_hypercube, uniform };

inline SamplingMode parse_sampling(std::string_view name) {
  if (name == "latin_hypercube") return SamplingMode::latin_hypercube;
  if (name == "uniform") return SamplingMode::uniform;
  throw config_error("unknown sampling mode '" + std::string(name) +
                     "' (expected latin_hypercube or uniform)");
}

inline const char* sampling_name(SamplingMode m) {
  return m == SamplingMode::latin_hypercube ? "latin_hypercube" : "uniform";
}

/// Collocation sets for one training interval. Boundary times pair with both
/// spatial endpoints; initial points are used by the soft loss only.
struct SamplePoints {
  std::vector<double> x_r, t_r;  // interior residual points
  std::vector<double> t_b;       // boundary times
  std::vector<double> x_0;       // initial-condition abscissae (at t_start)
  double t_start = 0.0;
};

namespace detail {

/// One stratum per point, independently shuffled per axis.
inline std::vector<double> latin_axis(std::size_t n, double lo, double hi,
                                      Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(perm[i], perm[j]);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = (static_cast<double>(perm[i]) + rng.uniform01()) /
                        static_cast<double>(n);
    out[i] = lo + (hi - lo) * frac;
  }
  return out;
}

inline std::vector<double> uniform_axis(std::size_t n, double lo, double hi,
                                        Rng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(lo, hi);
  return out;
}

}  // namespace detail

/// Deterministic point sets: each set draws from its own seed stream, so
/// changing one count leaves the other sets unchanged.
inline SamplePoints sample_points(const ProblemInfo& info, double t0, double t1,
                                  std::size_t n_initial, std::size_t n_boundary,
                                  std::size_t n_residual, SamplingMode mode,
                                  std::uint64_t seed) {
  if (!(t0 < t1)) throw config_error("sample_points: empty time span");
  if (n_initial < 1 || n_boundary < 1 || n_residual < 1)
    throw config_error("sample_points: all point counts must be >= 1");

  SamplePoints pts;
  pts.t_start = t0;

  Rng rng_r(mix_seed(seed, 101));
  Rng rng_b(mix_seed(seed, 202));
  if (mode == SamplingMode::latin_hypercube) {
    pts.x_r = detail::latin_axis(n_residual, info.x_lo, info.x_hi, rng_r);
    pts.t_r = detail::latin_axis(n_residual, t0, t1, rng_r);
    pts.t_b = detail::latin_axis(n_boundary, t0, t1, rng_b);
  } else {
    pts.x_r = detail::uniform_axis(n_residual, info.x_lo, info.x_hi, rng_r);
    pts.t_r = detail::uniform_axis(n_residual, t0, t1, rng_r);
    pts.t_b = detail::uniform_axis(n_boundary, t0, t1, rng_b);
  }

  pts.x_0.resize(n_initial);
  if (n_initial == 1) {
    pts.x_0[0] = info.x_lo;
  } else {
    const double h = (info.x_hi - info.x_lo) / static_cast<double>(n_initial - 1);
    for (std::size_t i = 0; i < n_initial; ++i)
      pts.x_0[i] = info.x_lo + h * static_cast<double>(i);
  }
  return pts;
}

}  // namespace seqpinn
