#include "test_util.hpp"

using namespace seqpinn;

namespace {

Bundle<double> constant_bundle(double value, int x_order) {
  Bundle<double> b;
  b.u = value;
  b.x_order = x_order;
  return b;
}

}  // namespace

TEST_CASE("problem catalogue exposes the right domains and orders",
          "[problems]") {
  const auto conv = make_problem(Problem::convection);
  REQUIRE(conv.x_lo == 0.0);
  REQUIRE(conv.x_hi == Catch::Approx(2.0 * std::numbers::pi));
  REQUIRE(conv.max_x_order == 1);
  REQUIRE(conv.match_orders == std::vector<int>{0});
  REQUIRE(conv.has_exact);
  REQUIRE(conv.beta == 40.0);

  const auto ac = make_problem(Problem::allen_cahn);
  REQUIRE(ac.x_lo == -1.0);
  REQUIRE(ac.x_hi == 1.0);
  REQUIRE(ac.max_x_order == 2);
  REQUIRE(ac.match_orders == (std::vector<int>{0, 1}));
  REQUIRE_FALSE(ac.has_exact);
  REQUIRE(ac.diffusivity == 1e-4);
  REQUIRE(ac.reaction == 5.0);

  const auto kdv = make_problem(Problem::kdv);
  REQUIRE(kdv.x_lo == -1.0);
  REQUIRE(kdv.x_hi == 1.0);
  REQUIRE(kdv.max_x_order == 3);
  REQUIRE(kdv.match_orders == (std::vector<int>{0, 1}));
  REQUIRE(kdv.dispersion == 0.0025);
}

TEST_CASE("problem names parse both ways", "[problems]") {
  for (auto p : {Problem::convection, Problem::allen_cahn, Problem::kdv})
    REQUIRE(parse_problem(problem_name(p)) == p);
  REQUIRE_THROWS_AS(parse_problem("burgers"), config_error);
  REQUIRE(make_problem("kdv").id == Problem::kdv);
}

TEST_CASE("reaction-diffusion residual on constant states is exact",
          "[problems]") {
  const auto ac = make_problem(Problem::allen_cahn);
  // The two wells u = +-1 and the unstable point u = 0 are equilibria.
  REQUIRE(residual(ac, constant_bundle(1.0, 2)) == 0.0);
  REQUIRE(residual(ac, constant_bundle(-1.0, 2)) == 0.0);
  REQUIRE(residual(ac, constant_bundle(0.0, 2)) == 0.0);
  // 5 * (0.5^3 - 0.5) = -1.875 exactly in binary arithmetic.
  REQUIRE(residual(ac, constant_bundle(0.5, 2)) == -1.875);
}

TEST_CASE("dispersive residual vanishes on constants", "[problems]") {
  const auto kdv = make_problem(Problem::kdv);
  REQUIRE(residual(kdv, constant_bundle(0.7, 3)) == 0.0);
}

TEST_CASE("advection residual is identically zero on the exact solution",
          "[problems]") {
  const auto conv = make_problem(Problem::convection);
  for (double x : {0.0, 0.9, 3.2, 6.1}) {
    for (double t : {0.0, 0.013, 0.05}) {
      const double theta = x - conv.beta * t;
      Bundle<double> b;
      b.x_order = 1;
      b.u = std::sin(theta);
      b.u_x = std::cos(theta);
      b.u_t = -conv.beta * std::cos(theta);
      REQUIRE(residual(conv, b) == 0.0);
    }
  }
}

TEST_CASE("residual refuses bundles missing required derivatives",
          "[problems]") {
  const auto ac = make_problem(Problem::allen_cahn);
  REQUIRE_THROWS_AS(residual(ac, constant_bundle(1.0, 1)), config_error);
  const auto kdv = make_problem(Problem::kdv);
  REQUIRE_THROWS_AS(residual(kdv, constant_bundle(1.0, 2)), config_error);
}

TEST_CASE("residual gradients match finite differences", "[problems]") {
  Bundle<double> b;
  b.x_order = 3;
  b.u = 0.4;
  b.u_t = -0.2;
  b.u_x = 1.1;
  b.u_xx = 0.6;
  b.u_xxx = -0.9;
  const double h = 1e-6;
  for (auto pid : {Problem::convection, Problem::allen_cahn, Problem::kdv}) {
    const auto info = make_problem(pid);
    const auto g = residual_gradient(info, b);
    auto bump = [&](double Bundle<double>::* field, double delta) {
      Bundle<double> c = b;
      c.*field = c.*field + delta;
      return residual(info, c);
    };
    auto fd = [&](double Bundle<double>::* field) {
      return (bump(field, h) - bump(field, -h)) / (2 * h);
    };
    REQUIRE(std::abs(g.u - fd(&Bundle<double>::u)) <= 1e-7);
    REQUIRE(std::abs(g.u_t - fd(&Bundle<double>::u_t)) <= 1e-7);
    REQUIRE(std::abs(g.u_x - fd(&Bundle<double>::u_x)) <= 1e-7);
    REQUIRE(std::abs(g.u_xx - fd(&Bundle<double>::u_xx)) <= 1e-7);
    REQUIRE(std::abs(g.u_xxx - fd(&Bundle<double>::u_xxx)) <= 1e-7);
  }
}

TEST_CASE("initial profiles take their textbook values", "[problems]") {
  const auto conv = make_problem(Problem::convection);
  REQUIRE(initial_condition(conv, 0.0) == 0.0);
  REQUIRE(initial_condition(conv, std::numbers::pi / 2) ==
          Catch::Approx(1.0).margin(1e-15));

  const auto ac = make_problem(Problem::allen_cahn);
  REQUIRE(initial_condition(ac, 0.0) == 0.0);
  REQUIRE(initial_condition(ac, 1.0) == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(initial_condition(ac, -1.0) == Catch::Approx(-1.0).margin(1e-12));

  const auto kdv = make_problem(Problem::kdv);
  REQUIRE(initial_condition(kdv, 0.0) == 1.0);
  REQUIRE(initial_condition(kdv, 1.0) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("periodic mismatches are reported per matched order", "[problems]") {
  const auto ac = make_problem(Problem::allen_cahn);
  // u = x has u(-1) - u(1) = -2 and matching first derivatives.
  Bundle<double> lo = constant_bundle(-1.0, 2);
  Bundle<double> hi = constant_bundle(1.0, 2);
  lo.u_x = 1.0;
  hi.u_x = 1.0;
  const auto r = boundary_residuals(ac, lo, hi);
  REQUIRE(r.size() == 2);
  REQUIRE(r[0] == -2.0);
  REQUIRE(r[1] == 0.0);

  const auto conv = make_problem(Problem::convection);
  const auto rc = boundary_residuals(conv, lo, hi);
  REQUIRE(rc.size() == 1);
  REQUIRE(rc[0] == -2.0);
}

TEST_CASE("closed-form solution exists only for advection", "[problems]") {
  const auto conv = make_problem(Problem::convection);
  REQUIRE(exact_solution(conv, 0.3, 0.0) == std::sin(0.3));
  REQUIRE(exact_solution(conv, 1.0, 0.01) ==
          Catch::Approx(std::sin(1.0 - 0.4)).margin(1e-15));
  REQUIRE_THROWS_AS(exact_solution(make_problem(Problem::allen_cahn), 0, 0),
                    no_exact_solution_error);
  REQUIRE_THROWS_AS(exact_solution(make_problem(Problem::kdv), 0, 0),
                    no_exact_solution_error);
}

TEST_CASE("benchmark defaults mirror the reported setups", "[problems]") {
  const auto conv = make_problem(Problem::convection);
  auto sc = default_network_spec(conv);
  REQUIRE(sc.depth == 4);
  REQUIRE(sc.width == 40);
  REQUIRE(sc.embedding == Embedding::fourier);
  REQUIRE(sc.fourier_modes == 10);
  REQUIRE(sc.fourier_period == Catch::Approx(2 * std::numbers::pi));

  const auto kdv = make_problem(Problem::kdv);
  auto sk = default_network_spec(kdv);
  REQUIRE(sk.depth == 3);
  REQUIRE(sk.width == 50);
  REQUIRE(sk.embedding == Embedding::raw);

  REQUIRE(default_weights(conv).w_i == 1.0);
  const auto wa = default_weights(make_problem(Problem::allen_cahn));
  REQUIRE(wa.w_i == 100.0);
  REQUIRE(wa.w_b == 1.0);
  REQUIRE(wa.w_r == 1.0);
}
