#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "seqpinn/diff.hpp"
#include "seqpinn/errors.hpp"
#include "seqpinn/influence.hpp"
#include "seqpinn/network.hpp"
#include "seqpinn/problems.hpp"
#include "seqpinn/sampling.hpp"

namespace seqpinn {

template <class Real>
struct LossBreakdown {
  Real total = 0, initial = 0, boundary = 0, residual = 0;
};

/// Blend of a frozen and a trainable bundle under an influence weight. The
/// weight depends only on time, so spatial derivatives blend with the same
/// (lambda, eta) while the time derivative picks up the weight's own slope.
template <class Real>
Bundle<Real> compose_hard(const Bundle<Real>& prev, const Bundle<Real>& curr,
                          const InfluenceBundle& w) {
  const Real lam = static_cast<Real>(w.lambda);
  const Real eta = static_cast<Real>(w.eta);
  const Real lam_t = static_cast<Real>(w.dlambda_dt);
  Bundle<Real> h;
  h.x_order = std::min(prev.x_order, curr.x_order);
  h.u = lam * prev.u + eta * curr.u;
  h.u_x = lam * prev.u_x + eta * curr.u_x;
  h.u_xx = lam * prev.u_xx + eta * curr.u_xx;
  h.u_xxx = lam * prev.u_xxx + eta * curr.u_xxx;
  h.u_t = lam_t * prev.u + lam * prev.u_t - lam_t * curr.u + eta * curr.u_t;
  return h;
}

/// Single-point composed field, evaluating both networks on the spot.
inline BundleD hard_field(const NetworkSpec& prev_spec,
                          std::span<const double> prev_params,
                          const NetworkSpec& curr_spec,
                          std::span<const double> curr_params,
                          const InfluenceSpec& influence, double x, double t,
                          int max_x_order) {
  const BundleD prev = evaluate_bundle<double>(prev_spec, prev_params, x, t,
                                               max_x_order);
  const BundleD curr = evaluate_bundle<double>(curr_spec, curr_params, x, t,
                                               max_x_order);
  return compose_hard(prev, curr, influence_bundle(influence, t));
}

/// Standard collocation loss: weighted mean squares of the initial-condition
/// mismatch, the periodic boundary mismatches, and the interior residual.
template <class Real>
class SoftLoss final : public DifferentiableLoss<Real> {
 public:
  SoftLoss(const ProblemInfo& info, const NetworkSpec& spec,
           const LossWeights& weights, const SamplePoints& pts)
      : info_(info),
        weights_(weights),
        engine_(spec, info.max_x_order),
        n_r_(pts.x_r.size()),
        n_b_(pts.t_b.size()),
        n_0_(pts.x_0.size()) {
    const std::size_t n = n_r_ + 2 * n_b_ + n_0_;
    xs_.reserve(n);
    ts_.reserve(n);
    for (std::size_t i = 0; i < n_r_; ++i) {
      xs_.push_back(static_cast<Real>(pts.x_r[i]));
      ts_.push_back(static_cast<Real>(pts.t_r[i]));
    }
    for (std::size_t side = 0; side < 2; ++side) {
      const Real xb = static_cast<Real>(side == 0 ? info.x_lo : info.x_hi);
      for (std::size_t j = 0; j < n_b_; ++j) {
        xs_.push_back(xb);
        ts_.push_back(static_cast<Real>(pts.t_b[j]));
      }
    }
    for (std::size_t i = 0; i < n_0_; ++i) {
      xs_.push_back(static_cast<Real>(pts.x_0[i]));
      ts_.push_back(static_cast<Real>(pts.t_start));
      u0_.push_back(static_cast<Real>(initial_condition(info, pts.x_0[i])));
    }
    bundles_.resize(n);
    adj_.resize(n);
  }

  std::size_t dim() const override { return engine_.spec().param_count(); }

  Real value(std::span<const Real> params) override {
    return compute(params, {}, nullptr);
  }
  Real value_and_gradient(std::span<const Real> params,
                          std::span<Real> grad) override {
    return compute(params, grad, nullptr);
  }
  LossBreakdown<Real> breakdown(std::span<const Real> params) {
    LossBreakdown<Real> bd;
    compute(params, {}, &bd);
    return bd;
  }

 private:
  Real compute(std::span<const Real> params, std::span<Real> grad,
               LossBreakdown<Real>* bd) {
    const bool with_grad = !grad.empty();
    if (with_grad && grad.size() != dim())
      throw config_error("soft loss: gradient size mismatch");
    engine_.forward(params, xs_, ts_, bundles_);
    if (with_grad) {
      std::fill(grad.begin(), grad.end(), Real(0));
      std::fill(adj_.begin(), adj_.end(), Bundle<Real>{});
    }

    const std::size_t orders = info_.match_orders.size();
    Real sum_r = 0, sum_b = 0, sum_0 = 0;
    const Real cr = with_grad && n_r_ > 0
                        ? Real(2) * Real(weights_.w_r) / Real(n_r_)
                        : Real(0);
    const Real cb = with_grad && n_b_ > 0
                        ? Real(2) * Real(weights_.w_b) / Real(n_b_ * orders)
                        : Real(0);
    const Real c0 = with_grad && n_0_ > 0
                        ? Real(2) * Real(weights_.w_i) / Real(n_0_)
                        : Real(0);

    for (std::size_t i = 0; i < n_r_; ++i) {
      const Real r = residual(info_, bundles_[i]);
      sum_r += r * r;
      if (with_grad) {
        const Bundle<Real> g = residual_gradient(info_, bundles_[i]);
        Bundle<Real>& a = adj_[i];
        const Real c = cr * r;
        a.u = c * g.u;
        a.u_t = c * g.u_t;
        a.u_x = c * g.u_x;
        a.u_xx = c * g.u_xx;
        a.u_xxx = c * g.u_xxx;
      }
    }
    for (std::size_t j = 0; j < n_b_; ++j) {
      const std::size_t lo = n_r_ + j, hi = n_r_ + n_b_ + j;
      for (int order : info_.match_orders) {
        const Real m = order == 0 ? bundles_[lo].u - bundles_[hi].u
                                  : bundles_[lo].u_x - bundles_[hi].u_x;
        sum_b += m * m;
        if (with_grad) {
          const Real c = cb * m;
          if (order == 0) {
            adj_[lo].u += c;
            adj_[hi].u -= c;
          } else {
            adj_[lo].u_x += c;
            adj_[hi].u_x -= c;
          }
        }
      }
    }
    for (std::size_t i = 0; i < n_0_; ++i) {
      const std::size_t q = n_r_ + 2 * n_b_ + i;
      const Real d = bundles_[q].u - u0_[i];
      sum_0 += d * d;
      if (with_grad) adj_[q].u += c0 * d;
    }

    const Real l_r = n_r_ > 0 ? sum_r / Real(n_r_) : Real(0);
    const Real l_b = n_b_ > 0 ? sum_b / Real(n_b_ * orders) : Real(0);
    const Real l_0 = n_0_ > 0 ? sum_0 / Real(n_0_) : Real(0);
    const Real total = Real(weights_.w_i) * l_0 + Real(weights_.w_b) * l_b +
                       Real(weights_.w_r) * l_r;
    if (bd) *bd = {total, l_0, l_b, l_r};
    if (with_grad) engine_.backward(adj_, grad);
    return total;
  }

  ProblemInfo info_;
  LossWeights weights_;
  JetEngine<Real> engine_;
  std::size_t n_r_, n_b_, n_0_;
  std::vector<Real> xs_, ts_, u0_;
  std::vector<Bundle<Real>> bundles_, adj_;
};

/// Hard-constraint loss for intervals after the first: boundary and residual
/// mean squares of the composed field lambda*prev + eta*curr. No initial
/// term — continuity with the previous interval is built into the field.
/// When the influence spec is trainable, the last parameter is rho and the
/// loss is differentiable in it through the weight derivatives.
template <class Real>
class HardLoss final : public DifferentiableLoss<Real> {
 public:
  HardLoss(const ProblemInfo& info, const NetworkSpec& prev_spec,
           std::span<const double> prev_params, const NetworkSpec& curr_spec,
           const LossWeights& weights, const SamplePoints& pts,
           const InfluenceSpec& influence)
      : info_(info),
        weights_(weights),
        influence_(influence),
        engine_(curr_spec, info.max_x_order),
        n_r_(pts.x_r.size()),
        n_b_(pts.t_b.size()) {
    influence_.validate();
    const std::size_t n = n_r_ + 2 * n_b_;
    xs_.reserve(n);
    ts_.reserve(n);
    for (std::size_t i = 0; i < n_r_; ++i) {
      xs_.push_back(static_cast<Real>(pts.x_r[i]));
      ts_.push_back(static_cast<Real>(pts.t_r[i]));
    }
    for (std::size_t side = 0; side < 2; ++side) {
      const Real xb = static_cast<Real>(side == 0 ? info.x_lo : info.x_hi);
      for (std::size_t j = 0; j < n_b_; ++j) {
        xs_.push_back(xb);
        ts_.push_back(static_cast<Real>(pts.t_b[j]));
      }
    }
    bundles_.resize(n);
    adj_.resize(n);

    // The frozen network is evaluated once; it receives no gradient.
    prev_.resize(n);
    JetEngine<double> prev_engine(prev_spec, info.max_x_order);
    std::vector<double> xd(n), td(n);
    for (std::size_t q = 0; q < n; ++q) {
      xd[q] = static_cast<double>(xs_[q]);
      td[q] = static_cast<double>(ts_[q]);
    }
    std::vector<BundleD> pb(n);
    prev_engine.forward(prev_params, xd, td, pb);
    for (std::size_t q = 0; q < n; ++q) {
      prev_[q].u = static_cast<Real>(pb[q].u);
      prev_[q].u_t = static_cast<Real>(pb[q].u_t);
      prev_[q].u_x = static_cast<Real>(pb[q].u_x);
      prev_[q].u_xx = static_cast<Real>(pb[q].u_xx);
      prev_[q].u_xxx = static_cast<Real>(pb[q].u_xxx);
      prev_[q].x_order = pb[q].x_order;
    }
  }

  bool trainable_p() const {
    return influence_.p_mode == InfluenceSpec::PMode::trainable;
  }
  std::size_t dim() const override {
    return engine_.spec().param_count() + (trainable_p() ? 1 : 0);
  }

  Real value(std::span<const Real> params) override {
    return compute(params, {}, nullptr);
  }
  Real value_and_gradient(std::span<const Real> params,
                          std::span<Real> grad) override {
    return compute(params, grad, nullptr);
  }
  LossBreakdown<Real> breakdown(std::span<const Real> params) {
    LossBreakdown<Real> bd;
    compute(params, {}, &bd);
    return bd;
  }

  /// Influence spec with rho (or fixed p) taken from a parameter vector.
  InfluenceSpec influence_with(std::span<const Real> params) const {
    InfluenceSpec s = influence_;
    if (trainable_p())
      s.rho = static_cast<double>(params[engine_.spec().param_count()]);
    return s;
  }

 private:
  Real compute(std::span<const Real> params, std::span<Real> grad,
               LossBreakdown<Real>* bd) {
    const bool with_grad = !grad.empty();
    if (params.size() != dim())
      throw config_error("hard loss: parameter vector length mismatch");
    if (with_grad && grad.size() != dim())
      throw config_error("hard loss: gradient size mismatch");

    const std::size_t np = engine_.spec().param_count();
    const InfluenceSpec ispec = influence_with(params);
    const double p = ispec.resolved_p();
    const double dpdr = trainable_p() ? dp_drho(ispec.rho, ispec) : 0.0;

    engine_.forward(params.subspan(0, np), xs_, ts_, bundles_);
    if (with_grad) {
      std::fill(grad.begin(), grad.end(), Real(0));
      std::fill(adj_.begin(), adj_.end(), Bundle<Real>{});
    }

    const std::size_t orders = info_.match_orders.size();
    Real sum_r = 0, sum_b = 0;
    double rho_grad = 0.0;
    const Real cr = with_grad && n_r_ > 0
                        ? Real(2) * Real(weights_.w_r) / Real(n_r_)
                        : Real(0);
    const Real cb = with_grad && n_b_ > 0
                        ? Real(2) * Real(weights_.w_b) / Real(n_b_ * orders)
                        : Real(0);

    for (std::size_t i = 0; i < n_r_; ++i) {
      const InfluenceBundle w =
          influence_at(ispec.family, static_cast<double>(ts_[i]),
                       ispec.t_start, p);
      const Bundle<Real> h = compose_hard(prev_[i], bundles_[i], w);
      const Real r = residual(info_, h);
      sum_r += r * r;
      if (with_grad) {
        const Bundle<Real> g = residual_gradient(info_, h);
        const Real c = cr * r;
        seed_point(i, w, g, c);
        if (trainable_p())
          rho_grad += static_cast<double>(c) * dr_dp(i, w, g);
      }
    }
    for (std::size_t j = 0; j < n_b_; ++j) {
      const std::size_t lo = n_r_ + j, hi = n_r_ + n_b_ + j;
      const InfluenceBundle w =
          influence_at(ispec.family, static_cast<double>(ts_[lo]),
                       ispec.t_start, p);
      const Bundle<Real> hlo = compose_hard(prev_[lo], bundles_[lo], w);
      const Bundle<Real> hhi = compose_hard(prev_[hi], bundles_[hi], w);
      for (int order : info_.match_orders) {
        const Real m = order == 0 ? hlo.u - hhi.u : hlo.u_x - hhi.u_x;
        sum_b += m * m;
        if (with_grad) {
          const Real c = cb * m;
          Bundle<Real> g{};  // d(mismatch)/d(composed bundle entry)
          if (order == 0)
            g.u = Real(1);
          else
            g.u_x = Real(1);
          seed_point(lo, w, g, c);
          seed_point(hi, w, g, -c);
          if (trainable_p())
            rho_grad += static_cast<double>(c) *
                        (dr_dp(lo, w, g) - dr_dp(hi, w, g));
        }
      }
    }

    const Real l_r = n_r_ > 0 ? sum_r / Real(n_r_) : Real(0);
    const Real l_b = n_b_ > 0 ? sum_b / Real(n_b_ * orders) : Real(0);
    const Real total = Real(weights_.w_b) * l_b + Real(weights_.w_r) * l_r;
    if (bd) *bd = {total, Real(0), l_b, l_r};
    if (with_grad) {
      engine_.backward(adj_, grad.subspan(0, np));
      if (trainable_p()) grad[np] = static_cast<Real>(rho_grad * dpdr);
    }
    return total;
  }

  // Chain rule from a composed-bundle adjoint (c * g) to the trainable
  // network's bundle: spatial entries scale by eta; the value entry also
  // collects -lambda' from the composed time derivative.
  void seed_point(std::size_t q, const InfluenceBundle& w,
                  const Bundle<Real>& g, Real c) {
    const Real eta = static_cast<Real>(w.eta);
    const Real lam_t = static_cast<Real>(w.dlambda_dt);
    Bundle<Real>& a = adj_[q];
    a.u += c * (g.u * eta - g.u_t * lam_t);
    a.u_t += c * g.u_t * eta;
    a.u_x += c * g.u_x * eta;
    a.u_xx += c * g.u_xx * eta;
    a.u_xxx += c * g.u_xxx * eta;
  }

  // d(point term)/dp contracted with the local linearization g.
  double dr_dp(std::size_t q, const InfluenceBundle& w, const Bundle<Real>& g) {
    const Bundle<Real>& bp = prev_[q];
    const Bundle<Real>& bc = bundles_[q];
    const double lp = w.dlambda_dp, ltp = w.d2lambda_dtdp;
    const double du = lp * static_cast<double>(bp.u - bc.u);
    const double dux = lp * static_cast<double>(bp.u_x - bc.u_x);
    const double duxx = lp * static_cast<double>(bp.u_xx - bc.u_xx);
    const double duxxx = lp * static_cast<double>(bp.u_xxx - bc.u_xxx);
    const double dut = ltp * static_cast<double>(bp.u - bc.u) +
                       lp * static_cast<double>(bp.u_t - bc.u_t);
    return static_cast<double>(g.u) * du + static_cast<double>(g.u_t) * dut +
           static_cast<double>(g.u_x) * dux +
           static_cast<double>(g.u_xx) * duxx +
           static_cast<double>(g.u_xxx) * duxxx;
  }

  ProblemInfo info_;
  LossWeights weights_;
  InfluenceSpec influence_;
  JetEngine<Real> engine_;
  std::size_t n_r_, n_b_;
  std::vector<Real> xs_, ts_;
  std::vector<Bundle<Real>> bundles_, adj_, prev_;
};

}  // namespace seqpinn
