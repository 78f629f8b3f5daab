#include "test_util.hpp"

using namespace seqpinn;
using testutil::set_bias;
using testutil::set_weight;

namespace {

NetworkSpec raw_spec(int depth, int width) {
  NetworkSpec s;
  s.depth = depth;
  s.width = width;
  s.embedding = Embedding::raw;
  s.t_lo = 0.0;
  s.t_hi = 1.0;
  return s;
}

}  // namespace

TEST_CASE("parameter count for a raw 1x1 network", "[network]") {
  // One hidden layer: (2 inputs + bias) -> 1 unit, then (1 + bias) -> 1.
  REQUIRE(raw_spec(1, 1).param_count() == 5);
}

TEST_CASE("parameter count for the 21-feature 4x40 network", "[network]") {
  NetworkSpec s;
  s.depth = 4;
  s.width = 40;
  s.embedding = Embedding::fourier;
  s.fourier_modes = 10;
  s.fourier_period = 2.0 * std::numbers::pi;
  REQUIRE(s.input_dim() == 21);
  REQUIRE(s.param_count() ==
          (21 * 40 + 40) + 3 * (40 * 40 + 40) + (40 * 1 + 1));
  REQUIRE(s.param_count() == 5841);
}

TEST_CASE("parameter count for the raw 3x50 network", "[network]") {
  REQUIRE(raw_spec(3, 50).param_count() ==
          (2 * 50 + 50) + 2 * (50 * 50 + 50) + (50 * 1 + 1));
  REQUIRE(raw_spec(3, 50).param_count() == 5301);
}

TEST_CASE("initialization is bit-reproducible per seed", "[network]") {
  const NetworkSpec s = raw_spec(3, 20);
  const ParamVector a = init_network(s, 42);
  const ParamVector b = init_network(s, 42);
  const ParamVector c = init_network(s, 43);
  REQUIRE(a.values == b.values);
  REQUIRE(a.values != c.values);
  REQUIRE(a.seed == 42);
}

TEST_CASE("initialization gives bounded weights and zero biases", "[network]") {
  const NetworkSpec s = raw_spec(2, 10);
  const ParamVector p = init_network(s, 5);
  for (int l = 0; l < s.layer_count(); ++l) {
    const int fi = s.layer_in(l), fo = s.layer_out(l);
    const double limit = std::sqrt(6.0 / (fi + fo));
    const std::size_t off = s.layer_offset(l);
    for (int k = 0; k < fi * fo; ++k) {
      REQUIRE(std::abs(p.values[off + k]) <= limit);
    }
    for (int k = 0; k < fo; ++k) {
      REQUIRE(p.values[off + static_cast<std::size_t>(fi) * fo + k] == 0.0);
    }
  }
}

TEST_CASE("fourier_embed basic values", "[network]") {
  const auto at0 = fourier_embed(0.0, 1, 2.0);
  REQUIRE(at0.size() == 2);
  REQUIRE(at0[0] == 1.0);
  REQUIRE(at0[1] == 0.0);

  const auto half = fourier_embed(1.0, 1, 2.0);  // half period
  REQUIRE(half[0] == Catch::Approx(-1.0).margin(1e-15));
  REQUIRE(std::abs(half[1]) <= 1e-15);
}

TEST_CASE("fourier_embed is exactly periodic", "[network]") {
  const double period = 2.0 * std::numbers::pi;
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const double x = rng.uniform(-10.0, 10.0);
    const auto a = fourier_embed(x, 6, period);
    const auto b = fourier_embed(x + period, 6, period);
    for (std::size_t i = 0; i < a.size(); ++i)
      REQUIRE(a[i] == Catch::Approx(b[i]).margin(1e-12));
  }
}

TEST_CASE("zero output weights give the constant bias field", "[network]") {
  NetworkSpec s = raw_spec(2, 6);
  ParamVector p = init_network(s, 11);
  // Zero the output layer's weights, set its bias.
  const int lout = s.layer_count() - 1;
  for (int i = 0; i < s.layer_in(lout); ++i) set_weight(s, p.values, lout, 0, i, 0.0);
  set_bias(s, p.values, lout, 0, 3.25);
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const double x = rng.uniform(-2.0, 2.0), t = rng.uniform(0.0, 1.0);
    REQUIRE(forward(s, p, x, t) == 3.25);
  }
}

TEST_CASE("forward equals the value entry of the derivative bundle",
          "[network]") {
  NetworkSpec s;
  s.depth = 2;
  s.width = 8;
  s.embedding = Embedding::fourier;
  s.fourier_modes = 3;
  s.fourier_period = 2.0;
  s.t_lo = 0.0;
  s.t_hi = 0.5;
  const ParamVector p = init_network(s, 21);
  JetEngine<double> engine(s, 2);
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const double x = rng.uniform(-1.0, 1.0), t = rng.uniform(0.0, 0.5);
    REQUIRE(forward(s, p, x, t) == engine.evaluate(p.values, x, t).u);
  }
}

TEST_CASE("fourier networks are exactly periodic in x", "[network]") {
  NetworkSpec s;
  s.depth = 4;
  s.width = 40;
  s.embedding = Embedding::fourier;
  s.fourier_modes = 10;
  s.fourier_period = 2.0 * std::numbers::pi;
  const ParamVector p = init_network(s, 77);
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const double x = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double t = rng.uniform(0.0, 1.0);
    const double a = forward(s, p, x, t);
    const double b = forward(s, p, x + s.fourier_period, t);
    REQUIRE(a == Catch::Approx(b).margin(1e-12));
  }
}

TEST_CASE("network spec validation rejects bad shapes", "[network]") {
  NetworkSpec s = raw_spec(0, 4);
  REQUIRE_THROWS_AS(s.validate(), config_error);
  s = raw_spec(2, 0);
  REQUIRE_THROWS_AS(s.validate(), config_error);
  s = raw_spec(2, 4);
  s.embedding = Embedding::fourier;
  s.fourier_modes = 0;
  REQUIRE_THROWS_AS(s.validate(), config_error);
  s.fourier_modes = 2;
  s.fourier_period = -1.0;
  REQUIRE_THROWS_AS(s.validate(), config_error);
  s.fourier_period = 2.0;
  s.t_lo = 1.0;
  s.t_hi = 1.0;
  REQUIRE_THROWS_AS(s.validate(), config_error);
}
