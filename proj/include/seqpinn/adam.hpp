#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "seqpinn/diff.hpp"
#include "seqpinn/errors.hpp"

namespace seqpinn {

struct AdamConfig {
  std::size_t iters = 5000;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (lr <= 0 || eps <= 0) throw config_error("adam: lr and eps must be > 0");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
      throw config_error("adam: betas must lie in [0, 1)");
  }
};

template <class Real>
struct AdamResult {
  std::vector<Real> params;
  std::vector<Real> loss_trace;  // loss before each update
};

/// Plain Adam with bias correction over a fixed loss (no resampling), so the
/// trajectory is deterministic given the starting point.
template <class Real>
AdamResult<Real> run_adam(DifferentiableLoss<Real>& loss,
                          std::span<const Real> initial,
                          const AdamConfig& cfg) {
  cfg.validate();
  if (initial.size() != loss.dim())
    throw config_error("adam: initial parameter size mismatch");

  AdamResult<Real> out;
  out.params.assign(initial.begin(), initial.end());
  out.loss_trace.reserve(cfg.iters);

  const std::size_t n = out.params.size();
  std::vector<Real> grad(n), m(n, Real(0)), v(n, Real(0));
  double b1t = 1.0, b2t = 1.0;

  for (std::size_t it = 0; it < cfg.iters; ++it) {
    const Real f = loss.value_and_gradient(out.params, grad);
    if (!std::isfinite(static_cast<double>(f)))
      throw optimizer_error("adam: non-finite loss at iteration " +
                            std::to_string(it));
    out.loss_trace.push_back(f);
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    const double corr1 = 1.0 - b1t, corr2 = 1.0 - b2t;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = static_cast<double>(grad[i]);
      if (!std::isfinite(g))
        throw optimizer_error("adam: non-finite gradient at iteration " +
                              std::to_string(it));
      const double mi = cfg.beta1 * static_cast<double>(m[i]) +
                        (1.0 - cfg.beta1) * g;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) +
                        (1.0 - cfg.beta2) * g * g;
      m[i] = static_cast<Real>(mi);
      v[i] = static_cast<Real>(vi);
      const double step =
          cfg.lr * (mi / corr1) / (std::sqrt(vi / corr2) + cfg.eps);
      out.params[i] = static_cast<Real>(static_cast<double>(out.params[i]) - step);
    }
  }
  return out;
}

}  // namespace seqpinn
