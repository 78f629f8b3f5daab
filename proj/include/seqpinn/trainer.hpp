#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqpinn/adam.hpp"
#include "seqpinn/diff.hpp"
#include "seqpinn/errors.hpp"
#include "seqpinn/influence.hpp"
#include "seqpinn/lbfgs.hpp"
#include "seqpinn/loss.hpp"
#include "seqpinn/network.hpp"
#include "seqpinn/problems.hpp"
#include "seqpinn/rng.hpp"
#include "seqpinn/sampling.hpp"

namespace seqpinn {

/// How the transition parameter of each hard interval is chosen: trained
/// jointly with the weights, or fixed at a fraction of the interval
/// (1 = right endpoint, 0.5 = midpoint).
struct PivotPolicy {
  enum class Kind { trainable, fixed };
  Kind kind = Kind::trainable;
  double fraction = 1.0;

  static PivotPolicy trainable() { return {Kind::trainable, 1.0}; }
  static PivotPolicy fixed(double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw config_error("pivot fraction must lie in (0, 1]");
    return {Kind::fixed, fraction};
  }
};

struct TrainingConfig {
  LossWeights weights;
  std::size_t n_initial = 512;
  std::size_t n_boundary = 512;
  std::size_t n_residual = 10000;
  AdamConfig adam;
  LbfgsConfig lbfgs;
  SamplingMode sampling = SamplingMode::latin_hypercube;
  InfluenceFamily family = InfluenceFamily::cubic;
  PivotPolicy pivot;
  std::uint64_t seed = 0;
  bool warm_start = false;

  void validate() const {
    if (n_initial < 1 || n_boundary < 1 || n_residual < 1)
      throw config_error("training: all point counts must be >= 1");
    if (weights.w_i < 0 || weights.w_b < 0 || weights.w_r < 0)
      throw config_error("training: loss weights must be >= 0");
    adam.validate();
    lbfgs.validate();
  }
};

struct TrainSummary {
  double adam_initial_loss = 0;
  double adam_final_loss = 0;
  std::size_t lbfgs_iterations = 0;
  LbfgsStop lbfgs_reason = LbfgsStop::max_iters;
  bool lbfgs_restarted = false;
};

/// One trained interval. Parameters are stored widened to 64-bit regardless
/// of the training precision; the influence spec is absent for the first
/// (soft-trained) interval.
struct TrainedInterval {
  int index = 1;  // 1-based position in the sequence
  double t_lo = 0, t_hi = 1;
  NetworkSpec spec;
  std::vector<double> params;
  std::optional<InfluenceSpec> influence;
  LossBreakdown<double> final_losses;
  TrainSummary summary;
  std::uint64_t interval_seed = 0;

  double resolved_p() const {
    if (!influence) throw config_error("first interval has no transition parameter");
    return influence->resolved_p();
  }
};

struct ComposedSolution {
  ProblemInfo problem;
  std::vector<TrainedInterval> intervals;
  std::string precision = "f64";

  std::vector<double> nodes() const {
    std::vector<double> n;
    if (intervals.empty()) return n;
    n.push_back(intervals.front().t_lo);
    for (const auto& iv : intervals) n.push_back(iv.t_hi);
    return n;
  }
};

namespace detail {

template <class Real>
std::vector<Real> narrow(const std::vector<double>& v) {
  return std::vector<Real>(v.begin(), v.end());
}

template <class Real>
std::vector<double> widen(const std::vector<Real>& v) {
  return std::vector<double>(v.begin(), v.end());
}

/// Adam then L-BFGS; one restarted L-BFGS attempt with a halved initial step
/// if the line search gives up within the first 10 iterations.
template <class Real>
std::vector<Real> optimize(DifferentiableLoss<Real>& loss,
                           std::vector<Real> params, const TrainingConfig& cfg,
                           TrainSummary& summary) {
  AdamResult<Real> adam = run_adam<Real>(loss, params, cfg.adam);
  summary.adam_initial_loss = adam.loss_trace.empty()
                                  ? 0.0
                                  : static_cast<double>(adam.loss_trace.front());
  summary.adam_final_loss = adam.loss_trace.empty()
                                ? 0.0
                                : static_cast<double>(adam.loss_trace.back());

  auto attempt = [&](const LbfgsConfig& lc) {
    return run_lbfgs<Real>(loss, adam.params, lc);
  };

  LbfgsConfig lc = cfg.lbfgs;
  std::optional<LbfgsResult<Real>> result;
  try {
    result = attempt(lc);
  } catch (const optimizer_error&) {
    // Line search failed immediately; fall through to the restart below.
  }
  if (!result ||
      (result->reason == LbfgsStop::line_search_failure &&
       result->iterations < 10)) {
    lc.initial_step *= 0.5;
    summary.lbfgs_restarted = true;
    result = attempt(lc);
  }
  summary.lbfgs_iterations = result->iterations;
  summary.lbfgs_reason = result->reason;
  return result->params;
}

}  // namespace detail

/// Trains interval k on [t_lo, t_hi]. The first interval minimizes the
/// standard collocation loss; later intervals minimize the hard-constraint
/// loss against the frozen previous network, optionally training the
/// transition parameter (initialized at the interval midpoint).
template <class Real = double>
TrainedInterval train_interval(const ProblemInfo& info, int k,
                               const TrainedInterval* prev, double t_lo,
                               double t_hi, const NetworkSpec& base_spec,
                               const TrainingConfig& cfg) {
  cfg.validate();
  if (!(t_lo < t_hi)) throw config_error("train_interval: empty time span");
  if ((k == 1) != (prev == nullptr))
    throw config_error("train_interval: the first interval takes no previous "
                       "network and later intervals require one");

  TrainedInterval out;
  out.index = k;
  out.t_lo = t_lo;
  out.t_hi = t_hi;
  out.spec = base_spec;
  out.spec.t_lo = t_lo;
  out.spec.t_hi = t_hi;
  out.spec.validate();
  out.interval_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));

  const SamplePoints pts =
      sample_points(info, t_lo, t_hi, cfg.n_initial, cfg.n_boundary,
                    cfg.n_residual, cfg.sampling, out.interval_seed);

  std::vector<double> theta0 =
      (cfg.warm_start && prev) ? prev->params
                               : init_network(out.spec, out.interval_seed).values;

  try {
    if (k == 1) {
      SoftLoss<Real> loss(info, out.spec, cfg.weights, pts);
      std::vector<Real> p =
          detail::optimize<Real>(loss, detail::narrow<Real>(theta0), cfg,
                                 out.summary);
      out.final_losses = [&] {
        LossBreakdown<Real> bd = loss.breakdown(p);
        return LossBreakdown<double>{
            static_cast<double>(bd.total), static_cast<double>(bd.initial),
            static_cast<double>(bd.boundary), static_cast<double>(bd.residual)};
      }();
      out.params = detail::widen<Real>(p);
    } else {
      InfluenceSpec ispec;
      ispec.family = cfg.family;
      ispec.t_start = t_lo;
      ispec.t_end = t_hi;
      if (cfg.pivot.kind == PivotPolicy::Kind::trainable) {
        ispec.p_mode = InfluenceSpec::PMode::trainable;
        ispec.rho = 0.0;
        ispec.rho = midpoint_rho(ispec);
      } else {
        ispec.p_mode = InfluenceSpec::PMode::fixed;
        ispec.p = t_lo + cfg.pivot.fraction * (t_hi - t_lo);
      }
      ispec.validate();

      HardLoss<Real> loss(info, prev->spec, prev->params, out.spec,
                          cfg.weights, pts, ispec);
      std::vector<Real> p0 = detail::narrow<Real>(theta0);
      if (loss.trainable_p()) p0.push_back(static_cast<Real>(ispec.rho));
      std::vector<Real> p =
          detail::optimize<Real>(loss, std::move(p0), cfg, out.summary);

      if (loss.trainable_p())
        ispec.rho = static_cast<double>(p[out.spec.param_count()]);
      out.final_losses = [&] {
        LossBreakdown<Real> bd = loss.breakdown(p);
        return LossBreakdown<double>{
            static_cast<double>(bd.total), static_cast<double>(bd.initial),
            static_cast<double>(bd.boundary), static_cast<double>(bd.residual)};
      }();
      p.resize(out.spec.param_count());  // rho lives in the influence spec
      out.params = detail::widen<Real>(p);
      out.influence = ispec;
    }
  } catch (const optimizer_error& e) {
    throw training_error(k, std::string("interval ") + std::to_string(k) +
                                ": " + e.what());
  } catch (const numeric_error& e) {
    // Divergence can also surface as non-finite parameters reaching the
    // evaluation engine; report it the same way.
    throw training_error(k, std::string("interval ") + std::to_string(k) +
                                ": " + e.what());
  }
  return out;
}

/// Trains every interval of a chronological node schedule and returns the
/// composed piecewise solution. Earlier intervals are never touched again.
template <class Real = double>
ComposedSolution train_sequence(const ProblemInfo& info,
                                const std::vector<double>& nodes,
                                const NetworkSpec& base_spec,
                                const TrainingConfig& cfg) {
  if (nodes.size() < 2)
    throw config_error("train_sequence: schedule needs at least two nodes");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!(nodes[i] < nodes[i + 1]))
      throw config_error("train_sequence: nodes must increase strictly");

  ComposedSolution sol;
  sol.problem = info;
  sol.precision = std::is_same_v<Real, float> ? "f32" : "f64";
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    const TrainedInterval* prev = i == 0 ? nullptr : &sol.intervals.back();
    sol.intervals.push_back(train_interval<Real>(
        info, k, prev, nodes[i], nodes[i + 1], base_spec, cfg));
  }
  return sol;
}

/// Uniform schedule helper: count equal intervals over [0, T].
inline std::vector<double> uniform_nodes(double t_end, std::size_t count,
                                         double t_begin = 0.0) {
  if (count < 1) throw config_error("schedule: interval count must be >= 1");
  if (!(t_begin < t_end)) throw config_error("schedule: empty horizon");
  std::vector<double> nodes(count + 1);
  for (std::size_t i = 0; i <= count; ++i)
    nodes[i] = t_begin + (t_end - t_begin) * static_cast<double>(i) /
                             static_cast<double>(count);
  nodes.back() = t_end;
  return nodes;
}

}  // namespace seqpinn
