#include "test_util.hpp"

using namespace seqpinn;

namespace {

/// Small, fast setup shared by the sequence tests: two short intervals of the
/// advection problem with a slim harmonic network and trimmed iteration
/// budgets. Quality only needs to be good enough for structural checks.
TrainingConfig smoke_config() {
  TrainingConfig cfg;
  cfg.n_initial = 33;
  cfg.n_boundary = 16;
  cfg.n_residual = 128;
  cfg.adam.iters = 200;
  cfg.adam.lr = 2e-3;
  cfg.lbfgs.max_iters = 400;
  cfg.seed = 0;
  return cfg;
}

NetworkSpec smoke_spec(const ProblemInfo& info) {
  NetworkSpec spec;
  spec.depth = 2;
  spec.width = 10;
  spec.embedding = Embedding::fourier;
  spec.fourier_modes = 3;
  spec.fourier_period = info.x_hi - info.x_lo;
  return spec;
}

const ComposedSolution& smoke_solution() {
  static const ComposedSolution sol = [] {
    const auto info = make_problem(Problem::convection);
    return train_sequence<double>(info, uniform_nodes(0.02, 2),
                                  smoke_spec(info), smoke_config());
  }();
  return sol;
}

}  // namespace

TEST_CASE("uniform schedules are exact and inclusive", "[trainer]") {
  REQUIRE(uniform_nodes(2.0, 4) ==
          (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
  REQUIRE(uniform_nodes(5.0, 1) == (std::vector<double>{0.0, 5.0}));
  REQUIRE(uniform_nodes(1.0, 2, 0.5) == (std::vector<double>{0.5, 0.75, 1.0}));
  REQUIRE_THROWS_AS(uniform_nodes(1.0, 0), config_error);
  REQUIRE_THROWS_AS(uniform_nodes(0.0, 3), config_error);
}

TEST_CASE("interval index and previous network must be consistent",
          "[trainer]") {
  const auto info = make_problem(Problem::convection);
  const auto spec = smoke_spec(info);
  auto cfg = smoke_config();
  cfg.adam.iters = 1;
  cfg.lbfgs.max_iters = 1;
  TrainedInterval fake = testutil::constant_interval(info, 1, 0.0, 0.01, 0.0);
  REQUIRE_THROWS_AS(
      train_interval<double>(info, 2, nullptr, 0.01, 0.02, spec, cfg),
      config_error);
  REQUIRE_THROWS_AS(
      train_interval<double>(info, 1, &fake, 0.0, 0.01, spec, cfg),
      config_error);
  REQUIRE_THROWS_AS(
      train_interval<double>(info, 1, nullptr, 0.5, 0.5, spec, cfg),
      config_error);
}

TEST_CASE("a short two-interval run has the advertised structure",
          "[trainer]") {
  const auto& sol = smoke_solution();
  REQUIRE(sol.intervals.size() == 2);
  REQUIRE(sol.precision == "f64");
  REQUIRE(sol.nodes() == (std::vector<double>{0.0, 0.01, 0.02}));

  const auto& first = sol.intervals[0];
  REQUIRE(first.index == 1);
  REQUIRE_FALSE(first.influence.has_value());
  REQUIRE(first.params.size() == first.spec.param_count());
  REQUIRE(first.spec.t_lo == 0.0);
  REQUIRE(first.spec.t_hi == 0.01);
  REQUIRE(first.interval_seed == mix_seed(0, 1));
  REQUIRE(std::isfinite(first.final_losses.total));
  REQUIRE(first.final_losses.total < first.summary.adam_initial_loss);
  REQUIRE_THROWS_AS(first.resolved_p(), config_error);

  const auto& second = sol.intervals[1];
  REQUIRE(second.index == 2);
  REQUIRE(second.influence.has_value());
  REQUIRE(second.influence->t_start == 0.01);
  REQUIRE(second.influence->t_end == 0.02);
  REQUIRE(second.influence->p_mode == InfluenceSpec::PMode::trainable);
  REQUIRE(second.params.size() == second.spec.param_count());
  REQUIRE(second.interval_seed == mix_seed(0, 2));
  // The reparameterization keeps the trained transition point inside the
  // reachable band.
  const double p = second.resolved_p();
  REQUIRE(p > 0.01 + 0.05 * 0.01 * 0.999);
  REQUIRE(p <= 0.02);
  // Hard intervals have no initial-condition term.
  REQUIRE(second.final_losses.initial == 0.0);
}

TEST_CASE("composed intervals hand off without jumps", "[trainer]") {
  const auto rep = node_smoothness_check(smoke_solution(), 64);
  REQUIRE(rep.nodes.size() == 1);
  REQUIRE(rep.nodes[0].t == 0.01);
  REQUIRE(rep.worst_du <= 1e-6);
  REQUIRE(rep.worst_du_t <= 1e-5);
}

TEST_CASE("training is deterministic and never revisits frozen intervals",
          "[trainer]") {
  const auto info = make_problem(Problem::convection);
  const auto spec = smoke_spec(info);
  const auto cfg = smoke_config();
  const auto& sol = smoke_solution();

  // Bitwise repeatability of the whole sequence.
  const auto again =
      train_sequence<double>(info, uniform_nodes(0.02, 2), spec, cfg);
  REQUIRE(again.intervals.size() == sol.intervals.size());
  for (std::size_t k = 0; k < sol.intervals.size(); ++k) {
    REQUIRE(again.intervals[k].params == sol.intervals[k].params);
    REQUIRE(again.intervals[k].final_losses.total ==
            sol.intervals[k].final_losses.total);
  }

  // Training a one-interval prefix gives exactly the same first network:
  // appending intervals can never alter what was already trained.
  const auto prefix =
      train_sequence<double>(info, uniform_nodes(0.01, 1), spec, cfg);
  REQUIRE(prefix.intervals.size() == 1);
  REQUIRE(prefix.intervals[0].params == sol.intervals[0].params);
}

TEST_CASE("fixed pivot policies place the transition point directly",
          "[trainer]") {
  const auto info = make_problem(Problem::convection);
  const auto spec = smoke_spec(info);
  auto cfg = smoke_config();
  cfg.adam.iters = 3;
  cfg.lbfgs.max_iters = 3;

  TrainedInterval first =
      train_interval<double>(info, 1, nullptr, 0.0, 0.01, spec, cfg);

  cfg.pivot = PivotPolicy::fixed(1.0);
  const auto right =
      train_interval<double>(info, 2, &first, 0.01, 0.02, spec, cfg);
  REQUIRE(right.influence->p_mode == InfluenceSpec::PMode::fixed);
  REQUIRE(right.resolved_p() == 0.02);

  cfg.pivot = PivotPolicy::fixed(0.5);
  const auto mid =
      train_interval<double>(info, 2, &first, 0.01, 0.02, spec, cfg);
  REQUIRE(mid.resolved_p() == Catch::Approx(0.015).margin(1e-15));

  REQUIRE_THROWS_AS(PivotPolicy::fixed(0.0), config_error);
  REQUIRE_THROWS_AS(PivotPolicy::fixed(1.2), config_error);
}

TEST_CASE("divergence is reported with the failing interval", "[trainer]") {
  const auto info = make_problem(Problem::convection);
  const auto spec = smoke_spec(info);
  auto cfg = smoke_config();
  cfg.adam.iters = 10;
  cfg.adam.lr = 1e200;  // one update overflows the quadratic loss
  try {
    train_interval<double>(info, 1, nullptr, 0.0, 0.01, spec, cfg);
    FAIL("expected training_error");
  } catch (const training_error& e) {
    REQUIRE(e.interval_index == 1);
    REQUIRE(std::string(e.what()).find("interval 1") != std::string::npos);
  }
}

TEST_CASE("sequence schedules must be strictly increasing", "[trainer]") {
  const auto info = make_problem(Problem::convection);
  const auto spec = smoke_spec(info);
  const auto cfg = smoke_config();
  REQUIRE_THROWS_AS(
      train_sequence<double>(info, {0.0}, spec, cfg), config_error);
  REQUIRE_THROWS_AS(
      train_sequence<double>(info, {0.0, 0.5, 0.5}, spec, cfg), config_error);
  REQUIRE_THROWS_AS(
      train_sequence<double>(info, {0.0, 0.5, 0.2}, spec, cfg), config_error);
}

TEST_CASE("training configuration is validated up front", "[trainer]") {
  const auto info = make_problem(Problem::convection);
  const auto spec = smoke_spec(info);
  auto cfg = smoke_config();
  cfg.n_residual = 0;
  REQUIRE_THROWS_AS(
      train_interval<double>(info, 1, nullptr, 0.0, 0.01, spec, cfg),
      config_error);
  auto cfg2 = smoke_config();
  cfg2.weights.w_r = -1.0;
  REQUIRE_THROWS_AS(
      train_interval<double>(info, 1, nullptr, 0.0, 0.01, spec, cfg2),
      config_error);
}
