#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "seqpinn/errors.hpp"
#include "seqpinn/network.hpp"
#include "seqpinn/rng.hpp"

namespace seqpinn {

/// Value and input partial derivatives of the network field at one point.
/// Entries above x_order are not populated.
template <class Real>
struct Bundle {
  Real u = 0, u_t = 0, u_x = 0, u_xx = 0, u_xxx = 0;
  int x_order = 0;
};

using BundleD = Bundle<double>;

/// Batched evaluator producing exact input derivatives of a dense tanh
/// network by propagating truncated Taylor jets through every layer:
/// third order in x, first order in t, no mixed terms (none are needed by
/// the supported residual operators).
///
/// Storage convention: planes 0..nx hold the Taylor coefficients c_k of the
/// expansion in x (derivative = k! * c_k), the last plane holds the first
/// t-coefficient. Per layer, plane p of neuron j occupies the contiguous
/// column range [(p*W+j)*n, (p*W+j)*n + n).
///
/// backward() runs reverse mode over the same jet computation, so parameter
/// gradients are exact including through u_xxx.
template <class Real>
class JetEngine {
 public:
  JetEngine(const NetworkSpec& spec, int max_x_order)
      : spec_(spec), xo_(max_x_order) {
    spec_.validate();
    if (xo_ < 1 || xo_ > 3)
      throw config_error("jet engine: max_x_order must be in {1,2,3}");
    nc_ = xo_ + 1;        // x coefficient planes, including the value
    np_ = nc_ + 1;        // + t plane
    layers_ = spec_.layer_count();
  }

  const NetworkSpec& spec() const { return spec_; }
  int max_x_order() const { return xo_; }

  /// Batched jet forward pass. Keeps all layer activations so backward()
  /// can run afterwards; repeated calls reuse the workspace.
  void forward(std::span<const Real> params, std::span<const Real> xs,
               std::span<const Real> ts, std::span<Bundle<Real>> out) {
    const std::size_t n = xs.size();
    if (ts.size() != n || out.size() != n)
      throw config_error("jet engine: batch size mismatch");
    check_params(params);
    reserve(n);
    n_ = n;

    for (std::size_t b0 = 0; b0 < n; b0 += kBlock) {
      const std::size_t bn = std::min(kBlock, n - b0);
      build_input_block(xs, ts, b0, bn);
      const Real* A = in_.data();
      int in_dim = spec_.input_dim();
      std::size_t off = 0;
      for (int l = 0; l < layers_; ++l) {
        const int fo = spec_.layer_out(l);
        linear_block(params.data() + off, A, z_[l].data(), in_dim, fo, b0);
        if (l < layers_ - 1) {
          compose_block(z_[l].data(), a_[l].data(), fo, b0);
          A = a_[l].data();
        }
        off += static_cast<std::size_t>(in_dim) * fo + fo;
        in_dim = fo;
      }
      extract_block(out, b0, bn);
    }
  }

  /// Reverse sweep over the jets recorded by the last forward() call.
  /// `adj` holds d(loss)/d(bundle entry) per point; gradients accumulate
  /// into `grad` (not zeroed here).
  void backward(std::span<const Bundle<Real>> adj, std::span<Real> grad) {
    if (adj.size() != n_)
      throw config_error("jet engine: adjoint batch does not match last forward");
    if (grad.size() != spec_.param_count())
      throw config_error("jet engine: gradient size mismatch");

    for (std::size_t b0 = 0; b0 < n_; b0 += kBlock) {
      const std::size_t bn = std::min(kBlock, n_ - b0);
      seed_output_block(adj, b0, bn);
      // dz_ holds dL/dZ of the current layer for this block
      for (int l = layers_ - 1; l >= 0; --l) {
        const int fi = spec_.layer_in(l), fo = spec_.layer_out(l);
        const Real* A = (l == 0) ? in_.data() : a_[l - 1].data();
        accumulate_weight_grads(grad, l, A, fi, fo, b0);
        if (l == 0) break;
        linear_backward_block(grad_params_ptr(l), fi, fo);
        compose_backward_block(z_[l - 1].data(), a_[l - 1].data(), fi, b0);
      }
    }
  }

  /// Single-point evaluation; identical code path as a batch of one.
  Bundle<Real> evaluate(std::span<const Real> params, Real x, Real t) {
    Real xs[1] = {x}, ts[1] = {t};
    Bundle<Real> out[1];
    forward(params, std::span<const Real>(xs, 1), std::span<const Real>(ts, 1),
            std::span<Bundle<Real>>(out, 1));
    return out[0];
  }

 private:
  static constexpr std::size_t kBlock = 64;
  // Micro-tile widths. Lanes beyond the live batch are zero-filled (or hold
  // stale finite values), so kernels always run whole blocks: slack lanes
  // propagate finite garbage forward and exact zeros backward.
  static constexpr std::size_t kLanes = 32;  // linear kernels, per tile
  static constexpr int kJT = 4;              // weight-grad tile, output rows
  static constexpr int kIT = 2;              // weight-grad tile, input cols
  static constexpr std::size_t kVL = 4;      // weight-grad vector lanes

  NetworkSpec spec_;
  int xo_, nc_, np_, layers_;
  std::size_t n_ = 0, cap_ = 0;
  std::vector<Real> in_;                 // input planes
  std::vector<std::vector<Real>> z_, a_; // per-layer pre/post activation planes
  std::vector<Real> dz_, da_;            // per-block adjoint planes
  std::span<const Real> params_;         // weights of the last forward pass

  std::size_t in_idx(int plane, int i, std::size_t b) const {
    return (static_cast<std::size_t>(plane) * spec_.input_dim() + i) * cap_ + b;
  }

  // One exactly-rounded fused term where the platform has hardware fma
  // (doubles overall kernel throughput). Falls back to separate rounding
  // elsewhere; either way the per-lane term order is fixed.
  static Real madd(Real w, Real a, Real acc) {
#ifdef FP_FAST_FMA
    if constexpr (std::is_same_v<Real, double>)
      return std::fma(w, a, acc);
    else
      return acc + w * a;
#else
    return acc + w * a;
#endif
  }

  void check_params(std::span<const Real> params) {
    if (params.size() != spec_.param_count())
      throw config_error("jet engine: parameter vector length " +
                         std::to_string(params.size()) + " does not match spec (" +
                         std::to_string(spec_.param_count()) + ")");
    std::size_t off = 0;
    for (int l = 0; l < layers_; ++l) {
      const std::size_t sz =
          static_cast<std::size_t>(spec_.layer_in(l)) * spec_.layer_out(l) +
          spec_.layer_out(l);
      for (std::size_t k = 0; k < sz; ++k)
        if (!std::isfinite(static_cast<double>(params[off + k])))
          throw numeric_error("jet engine: non-finite parameter in layer " +
                              std::to_string(l));
      off += sz;
    }
    params_ = params;
  }

  void reserve(std::size_t n) {
    if (n <= cap_) return;
    cap_ = (n + kBlock - 1) / kBlock * kBlock;  // whole blocks, no lane tails
    in_.assign(static_cast<std::size_t>(np_) * spec_.input_dim() * cap_, Real(0));
    z_.assign(layers_, {});
    a_.assign(layers_, {});
    for (int l = 0; l < layers_; ++l) {
      const std::size_t sz = static_cast<std::size_t>(np_) * spec_.width * cap_;
      z_[l].assign(sz, Real(0));
      if (l < layers_ - 1) a_[l].assign(sz, Real(0));
    }
    dz_.assign(static_cast<std::size_t>(np_) * spec_.width * kBlock, Real(0));
    da_.assign(static_cast<std::size_t>(np_) * spec_.width * kBlock, Real(0));
  }

  const Real* grad_params_ptr(int l) const {
    return params_.data() + spec_.layer_offset(l);
  }

  void build_input_block(std::span<const Real> xs, std::span<const Real> ts,
                         std::size_t b0, std::size_t bn) {
    const int t_feat = spec_.input_dim() - 1;
    const Real t_scale = Real(2) / (Real(spec_.t_hi) - Real(spec_.t_lo));
    if (spec_.embedding == Embedding::fourier) {
      const Real w =
          Real(2) * Real(std::numbers::pi) / Real(spec_.fourier_period);
      for (int k = 1; k <= spec_.fourier_modes; ++k) {
        const Real kw = Real(k) * w;
        const int ic = 2 * (k - 1), is = ic + 1;
        for (std::size_t b = 0; b < bn; ++b) {
          const Real c = std::cos(kw * xs[b0 + b]);
          const Real s = std::sin(kw * xs[b0 + b]);
          in_[in_idx(0, ic, b0 + b)] = c;
          in_[in_idx(0, is, b0 + b)] = s;
          if (nc_ > 1) {
            in_[in_idx(1, ic, b0 + b)] = -kw * s;
            in_[in_idx(1, is, b0 + b)] = kw * c;
          }
          if (nc_ > 2) {
            in_[in_idx(2, ic, b0 + b)] = -kw * kw * c / Real(2);
            in_[in_idx(2, is, b0 + b)] = -kw * kw * s / Real(2);
          }
          if (nc_ > 3) {
            in_[in_idx(3, ic, b0 + b)] = kw * kw * kw * s / Real(6);
            in_[in_idx(3, is, b0 + b)] = -kw * kw * kw * c / Real(6);
          }
          in_[in_idx(nc_, ic, b0 + b)] = Real(0);
          in_[in_idx(nc_, is, b0 + b)] = Real(0);
        }
      }
    } else {
      for (std::size_t b = 0; b < bn; ++b) {
        in_[in_idx(0, 0, b0 + b)] = xs[b0 + b];
        if (nc_ > 1) in_[in_idx(1, 0, b0 + b)] = Real(1);
        if (nc_ > 2) in_[in_idx(2, 0, b0 + b)] = Real(0);
        if (nc_ > 3) in_[in_idx(3, 0, b0 + b)] = Real(0);
        in_[in_idx(nc_, 0, b0 + b)] = Real(0);
      }
    }
    for (std::size_t b = 0; b < bn; ++b) {
      const Real th = (ts[b0 + b] - Real(spec_.t_lo)) * t_scale - Real(1);
      in_[in_idx(0, t_feat, b0 + b)] = th;
      for (int p = 1; p < nc_; ++p) in_[in_idx(p, t_feat, b0 + b)] = Real(0);
      in_[in_idx(nc_, t_feat, b0 + b)] = t_scale;
    }
  }

  // Z[p,j,:] = sum_i W[j,i] * A[p,i,:], bias added to plane 0 only.
  // Each lane accumulates bias first, then terms in ascending i; that chain
  // is part of the engine's reproducibility story, so tiles group lanes but
  // never reorder within one. Local accumulators plus __restrict let the
  // compiler keep a tile in vector registers across the i loop instead of
  // round-tripping Z through memory for every term.
  void linear_block(const Real* __restrict wb, const Real* __restrict A,
                    Real* __restrict Z, int fi, int fo, std::size_t b0) {
    const Real* bias = wb + static_cast<std::size_t>(fi) * fo;
    for (int p = 0; p < np_; ++p) {
      const Real* Ap = A + static_cast<std::size_t>(p) * fi * cap_ + b0;
      Real* Zp = Z + static_cast<std::size_t>(p) * fo * cap_ + b0;
      for (int j = 0; j < fo; ++j) {
        const Real* __restrict wrow = wb + static_cast<std::size_t>(j) * fi;
        Real* __restrict zrow = Zp + static_cast<std::size_t>(j) * cap_;
        const Real b0v = (p == 0) ? bias[j] : Real(0);
        for (std::size_t t0 = 0; t0 < kBlock; t0 += kLanes) {
          Real acc[kLanes];
          for (std::size_t v = 0; v < kLanes; ++v) acc[v] = b0v;
          const Real* __restrict a = Ap + t0;
          for (int i = 0; i < fi; ++i) {
            const Real w = wrow[i];
            const Real* __restrict ai =
                a + static_cast<std::size_t>(i) * cap_;
            for (std::size_t v = 0; v < kLanes; ++v)
              acc[v] = madd(w, ai[v], acc[v]);
          }
          for (std::size_t v = 0; v < kLanes; ++v) zrow[t0 + v] = acc[v];
        }
      }
    }
  }

  // Jet composition through tanh. With y = tanh(z0):
  //   d1 = 1 - y^2, d2 = -2 y d1, d3 = -2 (d1^2 + y d2)
  // computed from y rather than by naive chain compositions.
  void compose_block(const Real* __restrict Z, Real* __restrict A, int w,
                     std::size_t b0) {
    constexpr std::size_t bn = kBlock;
    for (int j = 0; j < w; ++j) {
      const std::size_t r0 = static_cast<std::size_t>(j) * cap_ + b0;
      const std::size_t stride = static_cast<std::size_t>(w) * cap_;
      for (std::size_t b = 0; b < bn; ++b) {
        const Real z0 = Z[r0 + b];
        const Real y = std::tanh(z0);
        const Real d1 = Real(1) - y * y;
        A[r0 + b] = y;
        const Real z1 = (nc_ > 1) ? Z[r0 + stride + b] : Real(0);
        if (nc_ > 1) A[r0 + stride + b] = d1 * z1;
        if (nc_ > 2) {
          const Real d2 = Real(-2) * y * d1;
          const Real z2 = Z[r0 + 2 * stride + b];
          A[r0 + 2 * stride + b] = d1 * z2 + (d2 / Real(2)) * z1 * z1;
          if (nc_ > 3) {
            const Real d3 = Real(-2) * (d1 * d1 + y * d2);
            const Real z3 = Z[r0 + 3 * stride + b];
            A[r0 + 3 * stride + b] =
                d1 * z3 + d2 * z1 * z2 + (d3 / Real(6)) * z1 * z1 * z1;
          }
        }
        A[r0 + static_cast<std::size_t>(nc_) * stride + b] =
            d1 * Z[r0 + static_cast<std::size_t>(nc_) * stride + b];
      }
    }
  }

  void extract_block(std::span<Bundle<Real>> out, std::size_t b0,
                     std::size_t bn) {
    const Real* Z = z_[layers_ - 1].data();  // output layer, single neuron
    for (std::size_t b = 0; b < bn; ++b) {
      Bundle<Real>& o = out[b0 + b];
      o.x_order = xo_;
      o.u = Z[b0 + b];
      o.u_x = (nc_ > 1) ? Z[cap_ + b0 + b] : Real(0);
      o.u_xx = (nc_ > 2) ? Real(2) * Z[2 * cap_ + b0 + b] : Real(0);
      o.u_xxx = (nc_ > 3) ? Real(6) * Z[3 * cap_ + b0 + b] : Real(0);
      o.u_t = Z[static_cast<std::size_t>(nc_) * cap_ + b0 + b];
    }
  }

  void seed_output_block(std::span<const Bundle<Real>> adj, std::size_t b0,
                         std::size_t bn) {
    std::fill(dz_.begin(), dz_.end(), Real(0));
    // Output layer has one neuron, so plane p sits at p * kBlock. Adjoints of
    // derivative entries are rescaled to Taylor-coefficient adjoints.
    for (std::size_t b = 0; b < bn; ++b) {
      const Bundle<Real>& a = adj[b0 + b];
      dz_[b] = a.u;
      if (nc_ > 1) dz_[kBlock + b] = a.u_x;
      if (nc_ > 2) dz_[2 * kBlock + b] = Real(2) * a.u_xx;
      if (nc_ > 3) dz_[3 * kBlock + b] = Real(6) * a.u_xxx;
      dz_[static_cast<std::size_t>(nc_) * kBlock + b] = a.u_t;
    }
  }

  // dW[j,i] += sum_p sum_b dZ[p,j,b] * A[p,i,b];  db[j] += sum_b dZ[0,j,b].
  // 4x2 register tile over (j,i); every accumulator contracts the block in
  // independent vector lanes and is reduced once at the end, so both panels
  // stream through the tile instead of being re-read per scalar entry. The
  // reduction order inside one dW entry is an implementation detail; only
  // run-to-run determinism is promised for gradients.
  void accumulate_weight_grads(std::span<Real> grad, int l,
                               const Real* __restrict A, int fi, int fo,
                               std::size_t b0) {
    Real* gw = grad.data() + spec_.layer_offset(l);
    Real* gb = gw + static_cast<std::size_t>(fi) * fo;
    const Real* __restrict dz = dz_.data();

    int j = 0;
    for (; j + kJT <= fo; j += kJT) {
      int i = 0;
      for (; i + kIT <= fi; i += kIT) {
        Real acc[kJT][kIT][kVL] = {};
        for (int p = 0; p < np_; ++p) {
          const Real* __restrict dzp =
              dz + (static_cast<std::size_t>(p) * fo + j) * kBlock;
          const Real* __restrict ap =
              A + (static_cast<std::size_t>(p) * fi + i) * cap_ + b0;
          for (std::size_t b = 0; b < kBlock; b += kVL)
            for (int jj = 0; jj < kJT; ++jj)
              for (int ii = 0; ii < kIT; ++ii)
                for (std::size_t v = 0; v < kVL; ++v)
                  acc[jj][ii][v] =
                      madd(dzp[static_cast<std::size_t>(jj) * kBlock + b + v],
                           ap[static_cast<std::size_t>(ii) * cap_ + b + v],
                           acc[jj][ii][v]);
        }
        for (int jj = 0; jj < kJT; ++jj)
          for (int ii = 0; ii < kIT; ++ii) {
            Real s = 0;
            for (std::size_t v = 0; v < kVL; ++v) s += acc[jj][ii][v];
            gw[static_cast<std::size_t>(j + jj) * fi + (i + ii)] += s;
          }
      }
      for (; i < fi; ++i)  // leftover input columns, scalar
        for (int jj = 0; jj < kJT; ++jj) {
          Real s = 0;
          for (int p = 0; p < np_; ++p) {
            const Real* dzrow =
                dz + (static_cast<std::size_t>(p) * fo + j + jj) * kBlock;
            const Real* arow =
                A + (static_cast<std::size_t>(p) * fi + i) * cap_ + b0;
            for (std::size_t b = 0; b < kBlock; ++b)
              s = madd(dzrow[b], arow[b], s);
          }
          gw[static_cast<std::size_t>(j + jj) * fi + i] += s;
        }
    }
    for (; j < fo; ++j)  // leftover output rows, scalar
      for (int i = 0; i < fi; ++i) {
        Real s = 0;
        for (int p = 0; p < np_; ++p) {
          const Real* dzrow =
              dz + (static_cast<std::size_t>(p) * fo + j) * kBlock;
          const Real* arow =
              A + (static_cast<std::size_t>(p) * fi + i) * cap_ + b0;
          for (std::size_t b = 0; b < kBlock; ++b)
            s = madd(dzrow[b], arow[b], s);
        }
        gw[static_cast<std::size_t>(j) * fi + i] += s;
      }

    for (int jb = 0; jb < fo; ++jb) {
      Real sb = 0;
      const Real* dzrow = dz + static_cast<std::size_t>(jb) * kBlock;
      for (std::size_t b = 0; b < kBlock; ++b) sb += dzrow[b];
      gb[jb] += sb;
    }
  }

  // dA[p,i,:] = sum_j W[j,i] * dZ[p,j,:], same register-tiled shape as the
  // forward kernel (ascending-j chains per lane).
  void linear_backward_block(const Real* __restrict wb, int fi, int fo) {
    for (int p = 0; p < np_; ++p) {
      const Real* __restrict dzp =
          dz_.data() + static_cast<std::size_t>(p) * fo * kBlock;
      Real* __restrict dap =
          da_.data() + static_cast<std::size_t>(p) * fi * kBlock;
      for (int i = 0; i < fi; ++i) {
        Real* __restrict darow = dap + static_cast<std::size_t>(i) * kBlock;
        for (std::size_t t0 = 0; t0 < kBlock; t0 += kLanes) {
          Real acc[kLanes];
          for (std::size_t v = 0; v < kLanes; ++v) acc[v] = Real(0);
          const Real* __restrict dzt = dzp + t0;
          for (int j = 0; j < fo; ++j) {
            const Real w = wb[static_cast<std::size_t>(j) * fi + i];
            const Real* __restrict dzrow =
                dzt + static_cast<std::size_t>(j) * kBlock;
            for (std::size_t v = 0; v < kLanes; ++v)
              acc[v] = madd(w, dzrow[v], acc[v]);
          }
          for (std::size_t v = 0; v < kLanes; ++v) darow[t0 + v] = acc[v];
        }
      }
    }
  }

  // Adjoint of the tanh jet composition, da_ -> dz_. Needs the fourth
  // derivative recurrence d4 = -2 (3 d1 d2 + y d3).
  void compose_backward_block(const Real* __restrict Z,
                              const Real* __restrict A, int w,
                              std::size_t b0) {
    constexpr std::size_t bn = kBlock;
    const std::size_t stride = static_cast<std::size_t>(w) * cap_;
    const std::size_t bstride = static_cast<std::size_t>(w) * kBlock;
    for (int j = 0; j < w; ++j) {
      const std::size_t r0 = static_cast<std::size_t>(j) * cap_ + b0;
      const std::size_t d0 = static_cast<std::size_t>(j) * kBlock;
      for (std::size_t b = 0; b < bn; ++b) {
        const Real y = A[r0 + b];
        const Real d1 = Real(1) - y * y;
        const Real d2 = Real(-2) * y * d1;
        const Real a0b = da_[d0 + b];
        const Real atb = da_[d0 + static_cast<std::size_t>(nc_) * bstride + b];
        const Real zt = Z[r0 + static_cast<std::size_t>(nc_) * stride + b];
        Real z1 = 0, z2 = 0, z3 = 0, a1b = 0, a2b = 0, a3b = 0;
        if (nc_ > 1) {
          z1 = Z[r0 + stride + b];
          a1b = da_[d0 + bstride + b];
        }
        if (nc_ > 2) {
          z2 = Z[r0 + 2 * stride + b];
          a2b = da_[d0 + 2 * bstride + b];
        }
        if (nc_ > 3) {
          z3 = Z[r0 + 3 * stride + b];
          a3b = da_[d0 + 3 * bstride + b];
        }
        Real dz0 = d1 * a0b + d2 * (z1 * a1b + zt * atb);
        Real dz1 = d1 * a1b;
        Real dz2 = 0, dz3 = 0;
        if (nc_ > 2) {
          const Real d3 = Real(-2) * (d1 * d1 + y * d2);
          const Real q2 = d2 * z2 + (d3 / Real(2)) * z1 * z1;
          dz0 += q2 * a2b;
          dz1 += d2 * z1 * a2b;
          dz2 = d1 * a2b;
          if (nc_ > 3) {
            const Real d4 = Real(-2) * (Real(3) * d1 * d2 + y * d3);
            dz0 += (d2 * z3 + d3 * z1 * z2 + (d4 / Real(6)) * z1 * z1 * z1) * a3b;
            dz1 += q2 * a3b;
            dz2 += d2 * z1 * a3b;
            dz3 = d1 * a3b;
          }
        }
        dz_[d0 + b] = dz0;
        if (nc_ > 1) dz_[d0 + bstride + b] = dz1;
        if (nc_ > 2) dz_[d0 + 2 * bstride + b] = dz2;
        if (nc_ > 3) dz_[d0 + 3 * bstride + b] = dz3;
        dz_[d0 + static_cast<std::size_t>(nc_) * bstride + b] = d1 * atb;
      }
    }
  }
};

/// One-shot convenience wrapper around JetEngine::evaluate.
template <class Real>
inline Bundle<Real> evaluate_bundle(const NetworkSpec& spec,
                                    std::span<const Real> params, Real x,
                                    Real t, int max_x_order) {
  JetEngine<Real> engine(spec, max_x_order);
  return engine.evaluate(params, x, t);
}

/// Plain field evaluation, defined as the value entry of the jet bundle so
/// the two paths cannot disagree.
inline double forward(const NetworkSpec& spec, const ParamVector& params,
                      double x, double t) {
  return evaluate_bundle<double>(spec, params.values, x, t, 1).u;
}

/// A scalar objective with an exact reverse-mode gradient.
template <class Real>
class DifferentiableLoss {
 public:
  virtual ~DifferentiableLoss() = default;
  virtual std::size_t dim() const = 0;
  virtual Real value(std::span<const Real> params) = 0;
  /// Returns the loss; writes the full gradient (overwriting) into grad.
  virtual Real value_and_gradient(std::span<const Real> params,
                                  std::span<Real> grad) = 0;
};

template <class Real>
struct LossResult {
  Real value;
  std::vector<Real> gradient;
};

template <class Real>
inline LossResult<Real> loss_gradient(DifferentiableLoss<Real>& loss,
                                      std::span<const Real> params) {
  LossResult<Real> r;
  r.gradient.assign(params.size(), Real(0));
  r.value = loss.value_and_gradient(params, r.gradient);
  return r;
}

/// Worst relative deviation between the reverse-mode gradient and central
/// finite differences on `sample_count` randomly chosen coordinates.
/// Per-coordinate step is step * max(1, |theta_i|); the deviation denominator
/// is max(|g_fd|, 1e-12).
template <class Real>
inline double finite_difference_check(DifferentiableLoss<Real>& loss,
                                      std::span<const Real> params, double step,
                                      std::size_t sample_count,
                                      std::uint64_t seed = 42) {
  if (!(step > 0)) throw config_error("finite_difference_check: step must be > 0");
  if (sample_count > params.size())
    throw config_error("finite_difference_check: sample_count exceeds parameter count");
  std::vector<Real> theta(params.begin(), params.end());
  std::vector<Real> grad(theta.size(), Real(0));
  loss.value_and_gradient(theta, grad);

  std::vector<std::size_t> coords(theta.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const std::size_t j = i + rng.below(coords.size() - i);
    std::swap(coords[i], coords[j]);
  }

  double worst = 0.0;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const std::size_t i = coords[s];
    const Real saved = theta[i];
    const Real h = Real(step) * std::max<Real>(Real(1), std::abs(saved));
    theta[i] = saved + h;
    const Real fp = loss.value(theta);
    theta[i] = saved - h;
    const Real fm = loss.value(theta);
    theta[i] = saved;
    const double gfd = (static_cast<double>(fp) - static_cast<double>(fm)) /
                       (2.0 * static_cast<double>(h));
    const double dev = std::abs(static_cast<double>(grad[i]) - gfd) /
                       std::max(std::abs(gfd), 1e-12);
    worst = std::max(worst, dev);
  }
  return worst;
}

}  // namespace seqpinn
