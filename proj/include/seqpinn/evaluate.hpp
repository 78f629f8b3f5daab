#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqpinn/diff.hpp"
#include "seqpinn/errors.hpp"
#include "seqpinn/grid.hpp"
#include "seqpinn/influence.hpp"
#include "seqpinn/trainer.hpp"

namespace seqpinn {

using TruthFn = std::function<double(double x, double t)>;

namespace detail {

/// Left-formula convention: a shared node belongs to the earlier interval.
inline std::size_t interval_index(const ComposedSolution& sol, double t) {
  const double t0 = sol.intervals.front().t_lo;
  const double t1 = sol.intervals.back().t_hi;
  const double tol = 1e-9 * std::max(1.0, t1 - t0);
  if (t < t0 - tol || t > t1 + tol)
    throw config_error("evaluate: t=" + std::to_string(t) + " outside [" +
                       std::to_string(t0) + ", " + std::to_string(t1) + "]");
  for (std::size_t k = 0; k < sol.intervals.size(); ++k)
    if (t <= sol.intervals[k].t_hi) return k;
  return sol.intervals.size() - 1;
}

}  // namespace detail

/// Value and time-derivative of the composed solution at a batch of points.
/// Points are grouped per interval so each network runs in full batches; on
/// interval k >= 2 the field is the influence-weighted blend of the previous
/// and current networks.
inline void evaluate_batch(const ComposedSolution& sol,
                           std::span<const double> xs,
                           std::span<const double> ts, std::span<double> u_out,
                           std::span<double> ut_out = {}) {
  if (sol.intervals.empty()) throw config_error("evaluate: empty solution");
  if (xs.size() != ts.size() || u_out.size() != xs.size())
    throw config_error("evaluate: mismatched batch spans");
  const bool want_ut = !ut_out.empty();
  if (want_ut && ut_out.size() != xs.size())
    throw config_error("evaluate: mismatched derivative span");

  std::vector<std::vector<std::size_t>> buckets(sol.intervals.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    buckets[detail::interval_index(sol, ts[i])].push_back(i);

  std::vector<double> bx, bt;
  std::vector<BundleD> cur, prv;
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    const auto& idx = buckets[k];
    if (idx.empty()) continue;
    const TrainedInterval& iv = sol.intervals[k];
    bx.resize(idx.size());
    bt.resize(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      bx[j] = xs[idx[j]];
      bt[j] = ts[idx[j]];
    }
    cur.resize(idx.size());
    JetEngine<double> eng(iv.spec, 1);
    eng.forward(iv.params, bx, bt, cur);

    if (k == 0) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        u_out[idx[j]] = cur[j].u;
        if (want_ut) ut_out[idx[j]] = cur[j].u_t;
      }
      continue;
    }

    const TrainedInterval& pv = sol.intervals[k - 1];
    prv.resize(idx.size());
    JetEngine<double> peng(pv.spec, 1);
    peng.forward(pv.params, bx, bt, prv);
    if (!iv.influence)
      throw config_error("evaluate: interval " + std::to_string(k + 1) +
                         " has no influence spec");
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const InfluenceBundle ib = influence_bundle(*iv.influence, bt[j]);
      u_out[idx[j]] = ib.lambda * prv[j].u + ib.eta * cur[j].u;
      if (want_ut)
        ut_out[idx[j]] = ib.dlambda_dt * (prv[j].u - cur[j].u) +
                         ib.lambda * prv[j].u_t + ib.eta * cur[j].u_t;
    }
  }
}

inline double evaluate_composed(const ComposedSolution& sol, double x,
                                double t) {
  double u;
  evaluate_batch(sol, std::span<const double>(&x, 1),
                 std::span<const double>(&t, 1), std::span<double>(&u, 1));
  return u;
}

struct IntervalError {
  int index = 0;
  double l2_rel = 0.0;
  std::size_t samples = 0;
};

struct ErrorReport {
  double l2_rel = 0.0;
  double l1 = 0.0;    ///< mean absolute error
  double linf = 0.0;  ///< max absolute error
  std::size_t n_samples = 0;
  std::uint32_t nx = 0, nt = 0;
  std::vector<IntervalError> per_interval;
  std::vector<std::uint64_t> seeds;
  std::string config_hash;
  double wall_seconds = 0.0;  ///< informational; never serialized
};

/// Uniform-grid error norms of the composed solution against ground truth.
/// x follows the periodic convention (x_hi is not a node); t spans the
/// solution's full range inclusively.
inline ErrorReport error_report(const ComposedSolution& sol,
                                const TruthFn& truth, std::uint32_t nx = 256,
                                std::uint32_t nt = 201) {
  if (nx < 1 || nt < 2) throw config_error("error_report: grid too small");
  const auto start = std::chrono::steady_clock::now();

  const double x_lo = sol.problem.x_lo, x_hi = sol.problem.x_hi;
  const double t_lo = sol.intervals.front().t_lo;
  const double t_hi = sol.intervals.back().t_hi;
  const std::size_t n = static_cast<std::size_t>(nx) * nt;

  std::vector<double> xs(n), ts(n), u(n);
  for (std::uint32_t i = 0; i < nt; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / (nt - 1);
    for (std::uint32_t j = 0; j < nx; ++j) {
      xs[static_cast<std::size_t>(i) * nx + j] = x_lo + (x_hi - x_lo) * j / nx;
      ts[static_cast<std::size_t>(i) * nx + j] = t;
    }
  }
  evaluate_batch(sol, xs, ts, u);

  ErrorReport rep;
  rep.nx = nx;
  rep.nt = nt;
  rep.n_samples = n;
  for (const TrainedInterval& iv : sol.intervals)
    rep.seeds.push_back(iv.interval_seed);
  rep.per_interval.resize(sol.intervals.size());
  for (std::size_t k = 0; k < sol.intervals.size(); ++k)
    rep.per_interval[k].index = static_cast<int>(k) + 1;

  double num = 0.0, den = 0.0, abs_sum = 0.0;
  std::vector<double> knum(sol.intervals.size(), 0.0),
      kden(sol.intervals.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ref = truth(xs[i], ts[i]);
    const double d = u[i] - ref;
    num += d * d;
    den += ref * ref;
    abs_sum += std::abs(d);
    rep.linf = std::max(rep.linf, std::abs(d));
    const std::size_t k = detail::interval_index(sol, ts[i]);
    knum[k] += d * d;
    kden[k] += ref * ref;
    ++rep.per_interval[k].samples;
  }
  if (den == 0.0)
    throw degenerate_solution_error("error_report: reference is zero on grid");
  rep.l2_rel = std::sqrt(num) / std::sqrt(den);
  rep.l1 = abs_sum / static_cast<double>(n);
  for (std::size_t k = 0; k < sol.intervals.size(); ++k)
    rep.per_interval[k].l2_rel =
        kden[k] > 0 ? std::sqrt(knum[k]) / std::sqrt(kden[k]) : 0.0;

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rep;
}

/// Same norms against a stored reference grid (bilinear in between nodes).
inline ErrorReport error_report(const ComposedSolution& sol,
                                const ReferenceGrid& grid,
                                std::uint32_t nx = 256, std::uint32_t nt = 201) {
  const double t_lo = sol.intervals.front().t_lo;
  const double t_hi = sol.intervals.back().t_hi;
  const double tol = 1e-9 * std::max(1.0, t_hi - t_lo);
  if (grid.t_lo > t_lo + tol || grid.t_hi < t_hi - tol)
    throw coverage_error("reference grid covers [" + std::to_string(grid.t_lo) +
                         ", " + std::to_string(grid.t_hi) +
                         "] but evaluation needs [" + std::to_string(t_lo) +
                         ", " + std::to_string(t_hi) + "]");
  if (std::abs(grid.x_lo - sol.problem.x_lo) > 1e-9 ||
      std::abs(grid.x_hi - sol.problem.x_hi) > 1e-9)
    throw coverage_error("reference grid spatial domain does not match");
  return error_report(
      sol, [&grid](double x, double t) { return interpolate(grid, x, t); }, nx,
      nt);
}

struct NodeJump {
  double t = 0.0;
  double du = 0.0;    ///< max |left value − right value| over x samples
  double du_t = 0.0;  ///< max |left u_t − right u_t| over x samples
};

struct SmoothnessReport {
  std::vector<NodeJump> nodes;
  double worst_du = 0.0;
  double worst_du_t = 0.0;
};

/// One-sided agreement of value and time-derivative at every interior node.
inline SmoothnessReport node_smoothness_check(const ComposedSolution& sol,
                                              std::uint32_t nx_samples = 256) {
  SmoothnessReport rep;
  if (sol.intervals.size() < 2) return rep;
  const double x_lo = sol.problem.x_lo, x_hi = sol.problem.x_hi;

  std::vector<double> bx(nx_samples), bt(nx_samples);
  std::vector<BundleD> left(nx_samples), right(nx_samples), prev(nx_samples);
  for (std::size_t k = 0; k + 1 < sol.intervals.size(); ++k) {
    const TrainedInterval& lv = sol.intervals[k];
    const TrainedInterval& rv = sol.intervals[k + 1];
    const double tn = lv.t_hi;
    for (std::uint32_t j = 0; j < nx_samples; ++j) {
      bx[j] = x_lo + (x_hi - x_lo) * j / nx_samples;
      bt[j] = tn;
    }
    // Left side: interval k's own formula at its right endpoint.
    JetEngine<double> leng(lv.spec, 1);
    leng.forward(lv.params, bx, bt, left);
    if (k > 0) {
      const TrainedInterval& pp = sol.intervals[k - 1];
      JetEngine<double> peng(pp.spec, 1);
      peng.forward(pp.params, bx, bt, prev);
      for (std::uint32_t j = 0; j < nx_samples; ++j) {
        const InfluenceBundle ib = influence_bundle(*lv.influence, tn);
        const double u = ib.lambda * prev[j].u + ib.eta * left[j].u;
        const double ut = ib.dlambda_dt * (prev[j].u - left[j].u) +
                          ib.lambda * prev[j].u_t + ib.eta * left[j].u_t;
        left[j].u = u;
        left[j].u_t = ut;
      }
    }
    // Right side: interval k+1's blend at its left endpoint.
    JetEngine<double> reng(rv.spec, 1);
    reng.forward(rv.params, bx, bt, right);
    JetEngine<double> lpeng(lv.spec, 1);
    std::vector<BundleD> base(nx_samples);
    lpeng.forward(lv.params, bx, bt, base);
    NodeJump jump;
    jump.t = tn;
    for (std::uint32_t j = 0; j < nx_samples; ++j) {
      const InfluenceBundle ib = influence_bundle(*rv.influence, tn);
      double u_r = ib.lambda * base[j].u + ib.eta * right[j].u;
      double ut_r = ib.dlambda_dt * (base[j].u - right[j].u) +
                    ib.lambda * base[j].u_t + ib.eta * right[j].u_t;
      // When k > 0 the "previous" seen by interval k+1 is interval k's raw
      // network, exactly as in training; the left side composed above uses
      // the same raw network, so the two sides probe the intended contract.
      jump.du = std::max(jump.du, std::abs(left[j].u - u_r));
      jump.du_t = std::max(jump.du_t, std::abs(left[j].u_t - ut_r));
    }
    rep.nodes.push_back(jump);
    rep.worst_du = std::max(rep.worst_du, jump.du);
    rep.worst_du_t = std::max(rep.worst_du_t, jump.du_t);
  }
  return rep;
}

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// CSV dump of the composed solution (plus reference and absolute error when
/// available) and a key:value sidecar at <path>.summary. Deterministic byte
/// output for identical inputs.
inline void emit_solution_grid(const ComposedSolution& sol,
                               const std::string& path, std::uint32_t nx = 256,
                               std::uint32_t nt = 201,
                               const TruthFn* truth = nullptr) {
  const double x_lo = sol.problem.x_lo, x_hi = sol.problem.x_hi;
  const double t_lo = sol.intervals.front().t_lo;
  const double t_hi = sol.intervals.back().t_hi;
  const std::size_t n = static_cast<std::size_t>(nx) * nt;

  std::vector<double> xs(n), ts(n), u(n);
  for (std::uint32_t i = 0; i < nt; ++i)
    for (std::uint32_t j = 0; j < nx; ++j) {
      xs[static_cast<std::size_t>(i) * nx + j] = x_lo + (x_hi - x_lo) * j / nx;
      ts[static_cast<std::size_t>(i) * nx + j] =
          t_lo + (t_hi - t_lo) * i / (nt - 1);
    }
  evaluate_batch(sol, xs, ts, u);

  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw format_error("emit_solution_grid: cannot open " + path);
  double num = 0.0, den = 0.0, abs_sum = 0.0, linf = 0.0;
  if (truth) {
    csv << "x,t,u_pred,u_ref,abs_err\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double ref = (*truth)(xs[i], ts[i]);
      const double d = std::abs(u[i] - ref);
      num += (u[i] - ref) * (u[i] - ref);
      den += ref * ref;
      abs_sum += d;
      linf = std::max(linf, d);
      csv << detail::fmt_g17(xs[i]) << ',' << detail::fmt_g17(ts[i]) << ','
          << detail::fmt_g17(u[i]) << ',' << detail::fmt_g17(ref) << ','
          << detail::fmt_g17(d) << '\n';
    }
  } else {
    csv << "x,t,u_pred\n";
    for (std::size_t i = 0; i < n; ++i)
      csv << detail::fmt_g17(xs[i]) << ',' << detail::fmt_g17(ts[i]) << ','
          << detail::fmt_g17(u[i]) << '\n';
  }
  if (!csv.flush()) throw format_error("emit_solution_grid: write failed");

  std::ofstream side(path + ".summary", std::ios::binary);
  if (!side)
    throw format_error("emit_solution_grid: cannot open " + path + ".summary");
  side << "problem: " << problem_name(sol.problem.id) << '\n';
  side << "precision: " << sol.precision << '\n';
  side << "intervals: " << sol.intervals.size() << '\n';
  side << "nodes:";
  for (double nd : sol.nodes()) side << ' ' << detail::fmt_g17(nd);
  side << '\n';
  side << "p_values:";
  for (const TrainedInterval& iv : sol.intervals)
    side << ' ' << (iv.influence ? detail::fmt_g17(iv.resolved_p()) : "-");
  side << '\n';
  side << "grid: " << nx << 'x' << nt << '\n';
  side << "samples: " << n << '\n';
  if (truth) {
    side << "l2_rel: "
         << detail::fmt_g17(den > 0 ? std::sqrt(num) / std::sqrt(den) : 0.0)
         << '\n';
    side << "l1: " << detail::fmt_g17(abs_sum / static_cast<double>(n)) << '\n';
    side << "linf: " << detail::fmt_g17(linf) << '\n';
  }
  if (!side.flush()) throw format_error("emit_solution_grid: write failed");
}

}  // namespace seqpinn
