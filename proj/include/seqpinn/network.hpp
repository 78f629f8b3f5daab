#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "seqpinn/errors.hpp"
#include "seqpinn/rng.hpp"

namespace seqpinn {

enum class Embedding { raw, fourier };

/// Dense tanh network architecture. The spatial input is either fed raw or
/// expanded into harmonics of a fixed period; the time input is always fed
/// raw, affinely rescaled from [t_lo, t_hi] to [-1, 1].
struct NetworkSpec {
  int depth = 4;   // hidden layers
  int width = 40;  // units per hidden layer
  Embedding embedding = Embedding::raw;
  int fourier_modes = 10;
  double fourier_period = 2.0 * std::numbers::pi;
  double t_lo = 0.0;
  double t_hi = 1.0;

  int input_dim() const {
    return embedding == Embedding::fourier ? 2 * fourier_modes + 1 : 2;
  }

  int layer_count() const { return depth + 1; }

  int layer_in(int l) const {
    return l == 0 ? input_dim() : width;
  }

  int layer_out(int l) const {
    return l == depth ? 1 : width;
  }

  std::size_t layer_offset(int l) const {
    std::size_t off = 0;
    for (int i = 0; i < l; ++i)
      off += static_cast<std::size_t>(layer_in(i)) * layer_out(i) + layer_out(i);
    return off;
  }

  std::size_t param_count() const { return layer_offset(layer_count()); }

  void validate() const {
    if (depth < 1 || width < 1)
      throw config_error("network: depth and width must be >= 1");
    if (embedding == Embedding::fourier) {
      if (fourier_modes < 1)
        throw config_error("network: fourier_modes must be >= 1");
      if (!(fourier_period > 0.0))
        throw config_error("network: fourier_period must be > 0");
    }
    if (!(t_lo < t_hi)) throw config_error("network: t_lo must be < t_hi");
  }
};

/// Flat trainable parameter storage. Canonical order: layer-major, each layer
/// as row-major weights followed by biases. The influence parameter rho, when
/// trainable, is appended by the trainer and is not part of this vector.
struct ParamVector {
  std::vector<double> values;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
};

/// Glorot-uniform weights, zero biases. Bit-reproducible for a given seed.
inline ParamVector init_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector p;
  p.seed = seed;
  p.values.resize(spec.param_count());
  Rng rng(seed);
  std::size_t off = 0;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const int fi = spec.layer_in(l), fo = spec.layer_out(l);
    const double limit = std::sqrt(6.0 / (fi + fo));
    for (int k = 0; k < fi * fo; ++k) p.values[off++] = rng.uniform(-limit, limit);
    for (int k = 0; k < fo; ++k) p.values[off++] = 0.0;
  }
  return p;
}

/// Harmonics of the domain period: [cos(k w x), sin(k w x)] for k=1..m,
/// w = 2*pi/period. Makes the network exactly periodic in x.
template <class Real>
inline void fourier_embed(Real x, int modes, Real period, std::span<Real> out) {
  const Real w = Real(2) * Real(std::numbers::pi) / period;
  for (int k = 1; k <= modes; ++k) {
    out[2 * (k - 1)] = std::cos(Real(k) * w * x);
    out[2 * (k - 1) + 1] = std::sin(Real(k) * w * x);
  }
}

inline std::vector<double> fourier_embed(double x, int modes, double period) {
  std::vector<double> out(2 * static_cast<std::size_t>(modes));
  fourier_embed<double>(x, modes, period, out);
  return out;
}

// forward(spec, params, x, t) lives in diff.hpp: it is defined as the value
// entry of the derivative bundle so the two paths cannot disagree.

}  // namespace seqpinn
