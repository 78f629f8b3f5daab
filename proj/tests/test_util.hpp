#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "seqpinn/seqpinn.hpp"

namespace testutil {

/// All-zero parameter vector for a spec (forward output is identically 0).
inline seqpinn::ParamVector zero_params(const seqpinn::NetworkSpec& spec) {
  seqpinn::ParamVector p;
  p.values.assign(spec.param_count(), 0.0);
  return p;
}

/// Weight W[j,i] of layer l in the canonical flat layout.
inline void set_weight(const seqpinn::NetworkSpec& spec,
                       std::vector<double>& params, int layer, int j, int i,
                       double v) {
  const std::size_t off = spec.layer_offset(layer);
  params[off + static_cast<std::size_t>(j) * spec.layer_in(layer) + i] = v;
}

/// Bias b[j] of layer l.
inline void set_bias(const seqpinn::NetworkSpec& spec,
                     std::vector<double>& params, int layer, int j, double v) {
  const std::size_t off = spec.layer_offset(layer) +
                          static_cast<std::size_t>(spec.layer_in(layer)) *
                              spec.layer_out(layer);
  params[off + j] = v;
}

/// |a-b| <= tol * max(1, |b|): relative for large values, absolute near zero.
inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

/// A trained-looking interval whose network outputs the constant `value`
/// everywhere (zero weights, output bias). Used to build synthetic composed
/// solutions without any training.
inline seqpinn::TrainedInterval constant_interval(
    const seqpinn::ProblemInfo& info, int index, double t_lo, double t_hi,
    double value) {
  seqpinn::TrainedInterval iv;
  iv.index = index;
  iv.t_lo = t_lo;
  iv.t_hi = t_hi;
  iv.spec = seqpinn::default_network_spec(info);
  iv.spec.depth = 1;
  iv.spec.width = 2;
  iv.spec.embedding = seqpinn::Embedding::raw;
  iv.spec.t_lo = t_lo;
  iv.spec.t_hi = t_hi;
  iv.params.assign(iv.spec.param_count(), 0.0);
  set_bias(iv.spec, iv.params, iv.spec.layer_count() - 1, 0, value);
  iv.interval_seed = 1000 + static_cast<std::uint64_t>(index);
  if (index > 1) {
    iv.influence = seqpinn::InfluenceSpec::fixed_p(
        seqpinn::InfluenceFamily::cubic, t_lo, t_hi, t_hi);
  }
  return iv;
}

/// Unique scratch directory under the system temp root, removed on scope
/// exit.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           (stem + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }
  std::string str() const { return dir_.string(); }

 private:
  std::filesystem::path dir_;
};

}  // namespace testutil
