#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "seqpinn/errors.hpp"
#include "seqpinn/problems.hpp"
#include "seqpinn/rng.hpp"
#include "seqpinn/sampling.hpp"
#include "seqpinn/trainer.hpp"

namespace seqpinn {

/// A solution over [0, t_end] that can be probed pointwise.
using EvaluableSolution = std::function<double(double x, double t)>;

/// What the partitioner needs from a training backend: fit a plain
/// (soft-constrained, single-network) solution on [0, t_end]. Injectable so
/// the decision loop can be exercised with scripted solutions.
class PartitionSolver {
 public:
  virtual ~PartitionSolver() = default;
  virtual EvaluableSolution solve(double t_end) = 0;
};

/// Relative L2 disagreement between two solutions over the given sample.
inline double discrepancy(const EvaluableSolution& u_full,
                          const EvaluableSolution& u_half,
                          const std::vector<double>& xs,
                          const std::vector<double>& ts) {
  if (xs.empty() || xs.size() != ts.size())
    throw config_error("discrepancy: need matching nonempty sample vectors");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double uh = u_half(xs[i], ts[i]);
    const double d = u_full(xs[i], ts[i]) - uh;
    num += d * d;
    den += uh * uh;
  }
  if (den == 0.0)
    throw degenerate_solution_error(
        "discrepancy: reference solution is identically zero on the sample");
  return std::sqrt(num) / std::sqrt(den);
}

struct PartitionEntry {
  double T;  ///< candidate length under test
  double D;  ///< posterior discrepancy between the [0,T] and [0,T/2] fits
};

struct PartitionResult {
  double interval_length = 0.0;
  std::uint32_t interval_count = 0;
  std::vector<PartitionEntry> history;
  bool hit_floor = false;  ///< stopped by the halving safety floor, not by D
};

struct PartitionConfig {
  double t_init = 1.0;
  double delta = 1e-3;
  std::uint32_t m_points = 10000;
  std::uint64_t seed = 0;
  double total_horizon = -1.0;  ///< defaults to t_init
  int max_halvings = 10;

  void validate() const {
    if (!(t_init > 0)) throw config_error("partition: t_init must be > 0");
    if (!(delta > 0)) throw config_error("partition: delta must be > 0");
    if (m_points == 0) throw config_error("partition: M must be >= 1");
    if (max_halvings < 1)
      throw config_error("partition: max_halvings must be >= 1");
  }
};

/// Interval-halving search for the shortest window on which a full-window
/// fit and a half-window fit tell the same story. Each round trains one new
/// half-window solution (the previous half becomes this round's full) and
/// compares them on a fresh Latin hypercube sample of the half window; it
/// keeps halving while the disagreement exceeds delta and is still shrinking.
inline PartitionResult adapt_partition(const ProblemInfo& info,
                                       const PartitionConfig& cfg,
                                       PartitionSolver& solver) {
  cfg.validate();
  const double horizon = cfg.total_horizon > 0 ? cfg.total_horizon : cfg.t_init;

  PartitionResult out;
  double T = cfg.t_init;
  double d_last = 1.0e15;
  int halvings = 0;

  auto fit = [&](double t_end) {
    try {
      return solver.solve(t_end);
    } catch (const std::exception& e) {
      throw partition_error(T, "partitioning: training on [0, " +
                                   std::to_string(t_end) +
                                   "] failed: " + e.what());
    }
  };

  EvaluableSolution u_full = fit(T);
  while (true) {
    EvaluableSolution u_half = fit(T / 2);

    Rng rx(mix_seed(cfg.seed, 7000 + static_cast<std::uint64_t>(halvings)));
    Rng rt(mix_seed(cfg.seed, 8000 + static_cast<std::uint64_t>(halvings)));
    const std::vector<double> xs =
        detail::latin_axis(cfg.m_points, info.x_lo, info.x_hi, rx);
    const std::vector<double> ts = detail::latin_axis(cfg.m_points, 0.0, T / 2, rt);

    const double d = discrepancy(u_full, u_half, xs, ts);
    out.history.push_back({T, d});

    if (d > cfg.delta && d <= d_last) {
      if (halvings >= cfg.max_halvings) {
        out.hit_floor = true;
        break;
      }
      T /= 2;
      ++halvings;
      d_last = d;
      u_full = std::move(u_half);
      continue;
    }
    break;
  }

  out.interval_length = T / 2;
  out.interval_count =
      static_cast<std::uint32_t>(std::ceil(horizon / out.interval_length - 1e-12));
  return out;
}

/// Production backend: each solve is a fresh single-interval soft fit.
class TrainerPartitionSolver : public PartitionSolver {
 public:
  TrainerPartitionSolver(ProblemInfo info, NetworkSpec spec,
                         TrainingConfig config)
      : info_(std::move(info)), spec_(spec), config_(std::move(config)) {}

  EvaluableSolution solve(double t_end) override {
    TrainingConfig cfg = config_;
    cfg.seed = mix_seed(config_.seed, 500 + calls_);
    ++calls_;
    TrainedInterval fit =
        train_interval<double>(info_, 1, nullptr, 0.0, t_end, spec_, cfg);
    NetworkSpec spec = fit.spec;
    ParamVector params{fit.params, fit.interval_seed};
    return [spec, params](double x, double t) {
      return forward(spec, params, x, t);
    };
  }

 private:
  ProblemInfo info_;
  NetworkSpec spec_;
  TrainingConfig config_;
  std::uint64_t calls_ = 0;
};

}  // namespace seqpinn
