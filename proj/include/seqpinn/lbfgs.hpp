#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "seqpinn/diff.hpp"
#include "seqpinn/errors.hpp"

namespace seqpinn {

struct LbfgsConfig {
  std::size_t history = 50;
  std::size_t max_iters = 30000;
  double c1 = 1e-4;         // sufficient-decrease constant
  double c2 = 0.9;          // curvature constant
  double grad_tol = 1e-8;   // sup-norm gradient threshold
  double loss_rel_tol = 1e-11;  // |df| <= tol * max(1, |f|)
  double initial_step = 1.0;

  void validate() const {
    if (history < 1) throw config_error("lbfgs: history must be >= 1");
    if (!(0 < c1 && c1 < c2 && c2 < 1))
      throw config_error("lbfgs: need 0 < c1 < c2 < 1");
    if (grad_tol <= 0 || loss_rel_tol <= 0 || initial_step <= 0)
      throw config_error("lbfgs: tolerances and initial step must be > 0");
  }
};

enum class LbfgsStop { grad_tol, loss_tol, max_iters, line_search_failure };

inline const char* lbfgs_stop_name(LbfgsStop s) {
  switch (s) {
    case LbfgsStop::grad_tol: return "gradient_tolerance";
    case LbfgsStop::loss_tol: return "loss_stall";
    case LbfgsStop::max_iters: return "max_iterations";
    default: return "line_search_failure";
  }
}

template <class Real>
struct LbfgsResult {
  std::vector<Real> params;
  Real final_loss = Real(0);
  LbfgsStop reason = LbfgsStop::max_iters;
  std::size_t iterations = 0;       // accepted steps
  std::vector<Real> accepted_losses;  // loss after each accepted step
};

namespace detail {

template <class Real>
double dot(std::span<const Real> a, std::span<const Real> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

template <class Real>
double sup_norm(std::span<const Real> a) {
  double m = 0;
  for (const Real v : a) m = std::max(m, std::abs(static_cast<double>(v)));
  return m;
}

/// Minimizer of the cubic through (a, fa, ga) and (b, fb, gb); falls back to
/// the midpoint when the interpolant is degenerate or leaves the bracket.
inline double cubic_min(double a, double fa, double ga, double b, double fb,
                        double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = gb - ga + 2.0 * d2;
    if (denom != 0.0) {
      const double x = b - (b - a) * (gb + d2 - d1) / denom;
      const double margin = 0.1 * (hi - lo);
      if (std::isfinite(x) && x > lo + margin && x < hi - margin) return x;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Limited-memory BFGS with a strong-Wolfe line search. The objective is
/// evaluated jointly with its gradient (one solver pass per trial point).
template <class Real>
LbfgsResult<Real> run_lbfgs(DifferentiableLoss<Real>& loss,
                            std::span<const Real> initial,
                            const LbfgsConfig& cfg) {
  cfg.validate();
  const std::size_t n = loss.dim();
  if (initial.size() != n)
    throw config_error("lbfgs: initial parameter size mismatch");

  LbfgsResult<Real> out;
  out.params.assign(initial.begin(), initial.end());

  std::vector<Real> x(initial.begin(), initial.end());
  std::vector<Real> g(n), x_trial(n), g_trial(n);
  double f = static_cast<double>(loss.value_and_gradient(x, g));
  if (!std::isfinite(f))
    throw optimizer_error("lbfgs: non-finite loss at the starting point");

  struct Pair {
    std::vector<Real> s, y;
    double rho;
  };
  std::deque<Pair> mem;

  std::vector<Real> d(n), q(n);
  std::vector<double> alpha_buf;

  auto finish = [&](LbfgsStop reason) {
    out.params = x;
    out.final_loss = static_cast<Real>(f);
    out.reason = reason;
    return out;
  };

  if (detail::sup_norm<Real>(g) <= cfg.grad_tol)
    return finish(LbfgsStop::grad_tol);

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    // Two-loop recursion for d = -H g.
    q.assign(g.begin(), g.end());
    alpha_buf.assign(mem.size(), 0.0);
    for (std::size_t i = mem.size(); i-- > 0;) {
      const Pair& p = mem[i];
      const double a = p.rho * detail::dot<Real>(p.s, q);
      alpha_buf[i] = a;
      for (std::size_t k = 0; k < n; ++k)
        q[k] = static_cast<Real>(static_cast<double>(q[k]) -
                                 a * static_cast<double>(p.y[k]));
    }
    double gamma = 1.0;
    if (!mem.empty()) {
      const Pair& newest = mem.back();
      gamma = 1.0 / (newest.rho * detail::dot<Real>(newest.y, newest.y));
    }
    for (std::size_t k = 0; k < n; ++k)
      d[k] = static_cast<Real>(-gamma * static_cast<double>(q[k]));
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const Pair& p = mem[i];
      const double b = p.rho * detail::dot<Real>(p.y, d);
      const double corr = alpha_buf[i] - b;
      for (std::size_t k = 0; k < n; ++k)
        d[k] = static_cast<Real>(static_cast<double>(d[k]) +
                                 corr * static_cast<double>(p.s[k]));
    }

    double dg = detail::dot<Real>(d, g);
    if (!(dg < 0.0)) {
      // Curvature information went bad; restart from steepest descent.
      mem.clear();
      for (std::size_t k = 0; k < n; ++k) d[k] = static_cast<Real>(-g[k]);
      dg = -detail::dot<Real>(g, g);
      if (!(dg < 0.0)) return finish(LbfgsStop::grad_tol);
    }

    // Strong-Wolfe line search on phi(a) = f(x + a d).
    const double phi0 = f, dphi0 = dg;
    double a_prev = 0.0, phi_prev = phi0, dphi_prev = dphi0;
    double a_cur = mem.empty()
                       ? std::min(cfg.initial_step,
                                  cfg.initial_step / std::max(1.0, detail::sup_norm<Real>(g)))
                       : cfg.initial_step;
    double a_acc = -1.0, phi_acc = 0.0;
    bool have_bracket = false;
    double b_lo = 0, b_hi = 0, phi_lo = 0, phi_hi = 0, dphi_lo = 0, dphi_hi = 0;

    auto eval_phi = [&](double a, double& phi, double& dphi) {
      for (std::size_t k = 0; k < n; ++k)
        x_trial[k] = static_cast<Real>(static_cast<double>(x[k]) +
                                       a * static_cast<double>(d[k]));
      phi = static_cast<double>(loss.value_and_gradient(x_trial, g_trial));
      dphi = detail::dot<Real>(g_trial, d);
    };

    for (int ls = 0; ls < 25 && !have_bracket; ++ls) {
      double phi = 0, dphi = 0;
      eval_phi(a_cur, phi, dphi);
      if (!std::isfinite(phi) || phi > phi0 + cfg.c1 * a_cur * dphi0 ||
          (ls > 0 && phi >= phi_prev)) {
        have_bracket = true;
        b_lo = a_prev; phi_lo = phi_prev; dphi_lo = dphi_prev;
        b_hi = a_cur; phi_hi = phi; dphi_hi = dphi;
        break;
      }
      if (std::abs(dphi) <= -cfg.c2 * dphi0) {
        a_acc = a_cur;
        phi_acc = phi;
        break;
      }
      if (dphi >= 0.0) {
        have_bracket = true;
        b_lo = a_cur; phi_lo = phi; dphi_lo = dphi;
        b_hi = a_prev; phi_hi = phi_prev; dphi_hi = dphi_prev;
        break;
      }
      a_prev = a_cur; phi_prev = phi; dphi_prev = dphi;
      a_cur *= 2.0;
      if (a_cur > 1e12) break;
    }

    if (a_acc < 0.0 && have_bracket) {
      for (int z = 0; z < 40; ++z) {
        const double a_j = detail::cubic_min(b_lo, phi_lo, dphi_lo, b_hi,
                                             phi_hi, dphi_hi);
        double phi = 0, dphi = 0;
        eval_phi(a_j, phi, dphi);
        if (!std::isfinite(phi) || phi > phi0 + cfg.c1 * a_j * dphi0 ||
            phi >= phi_lo) {
          b_hi = a_j; phi_hi = phi; dphi_hi = dphi;
        } else {
          if (std::abs(dphi) <= -cfg.c2 * dphi0) {
            a_acc = a_j;
            phi_acc = phi;
            break;
          }
          if (dphi * (b_hi - b_lo) >= 0.0) {
            b_hi = b_lo; phi_hi = phi_lo; dphi_hi = dphi_lo;
          }
          b_lo = a_j; phi_lo = phi; dphi_lo = dphi;
        }
        if (std::abs(b_hi - b_lo) <= 1e-14 * std::max(1.0, std::abs(b_lo)))
          break;
      }
    }

    if (a_acc < 0.0) {
      if (it == 0)
        throw optimizer_error(
            "lbfgs: line search failed at the first iteration");
      return finish(LbfgsStop::line_search_failure);
    }

    // x_trial and g_trial already hold the accepted point: a_acc is only
    // ever set immediately after eval_phi at that step length.
    const double phi_fin = phi_acc;

    Pair pr;
    pr.s.resize(n);
    pr.y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      pr.s[k] = static_cast<Real>(static_cast<double>(x_trial[k]) -
                                  static_cast<double>(x[k]));
      pr.y[k] = static_cast<Real>(static_cast<double>(g_trial[k]) -
                                  static_cast<double>(g[k]));
    }
    const double sy = detail::dot<Real>(pr.s, pr.y);
    const double ss = std::sqrt(detail::dot<Real>(pr.s, pr.s));
    const double yy = std::sqrt(detail::dot<Real>(pr.y, pr.y));
    if (sy > 1e-10 * ss * yy) {
      pr.rho = 1.0 / sy;
      mem.push_back(std::move(pr));
      if (mem.size() > cfg.history) mem.pop_front();
    }

    const double f_old = f;
    x = x_trial;
    g = g_trial;
    f = phi_fin;
    out.iterations = it + 1;
    out.accepted_losses.push_back(static_cast<Real>(f));

    if (detail::sup_norm<Real>(g) <= cfg.grad_tol)
      return finish(LbfgsStop::grad_tol);
    if (std::abs(f_old - f) <= cfg.loss_rel_tol * std::max(1.0, std::abs(f)))
      return finish(LbfgsStop::loss_tol);
  }
  return finish(LbfgsStop::max_iters);
}

}  // namespace seqpinn
