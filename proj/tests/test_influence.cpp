#include "test_util.hpp"

using namespace seqpinn;

namespace {

const InfluenceFamily kFamilies[] = {InfluenceFamily::cubic,
                                     InfluenceFamily::trig,
                                     InfluenceFamily::quintic};

InfluenceSpec unit_spec(InfluenceFamily fam, double p = 1.0) {
  return InfluenceSpec::fixed_p(fam, 0.0, 2.0, p);
}

}  // namespace

TEST_CASE("all fade families satisfy the blending conditions", "[influence]") {
  for (auto fam : kFamilies) {
    const auto report = verify_conditions(unit_spec(fam));
    INFO("family " << static_cast<int>(fam) << " worst violation "
                   << report.worst());
    REQUIRE(report.all_pass());
    REQUIRE(report.worst() <= 1e-10);
    if (fam != InfluenceFamily::quintic) REQUIRE(report.worst() <= 1e-12);
  }
}

TEST_CASE("a corrupted fade profile is caught by the right check",
          "[influence]") {
  // f(s) = 1 - s^2 starts flat and decays monotonically but lands at p with
  // slope -2/L: only the end-slope condition must fail.
  InfluenceProbe probe;
  probe.value = [](double s) { return 1.0 - s * s; };
  probe.slope = [](double s) { return -2.0 * s; };
  const auto report = verify_conditions(probe, 1.0);
  REQUIRE_FALSE(report.all_pass());
  for (const auto& c : report.checks) {
    if (c.name == "slope_at_p_is_zero") {
      REQUIRE_FALSE(c.pass);
      REQUIRE(c.violation == Catch::Approx(2.0).margin(1e-12));
    } else {
      REQUIRE(c.pass);
    }
  }
}

TEST_CASE("fade starts at one with zero slope, exactly", "[influence]") {
  for (auto fam : kFamilies) {
    const auto b = influence_at(fam, 0.0, 0.0, 1.0);
    REQUIRE(b.lambda == 1.0);
    REQUIRE(b.dlambda_dt == 0.0);
    REQUIRE(b.eta == 0.0);
    REQUIRE(b.deta_dt == 0.0);
  }
}

TEST_CASE("all families cross one half at the midpoint", "[influence]") {
  for (auto fam : kFamilies) {
    const auto b = influence_at(fam, 0.5, 0.0, 1.0);
    REQUIRE(b.lambda == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(b.eta == Catch::Approx(0.5).margin(1e-15));
  }
}

TEST_CASE("families agree at both endpoints", "[influence]") {
  for (auto fam : kFamilies) {
    const auto lo = influence_at(fam, 0.0, 0.0, 0.7);
    const auto hi = influence_at(fam, 0.7, 0.0, 0.7);
    REQUIRE(lo.lambda == 1.0);
    REQUIRE(std::abs(hi.lambda) <= 1e-15);
    REQUIRE(std::abs(hi.dlambda_dt) <= 1e-15);
  }
}

TEST_CASE("beyond the pivot the new network fully takes over", "[influence]") {
  for (auto fam : kFamilies) {
    for (double t : {0.7, 0.9, 5.0}) {
      const auto b = influence_at(fam, t, 0.0, 0.7);
      REQUIRE(b.lambda == 0.0);
      REQUIRE(b.eta == 1.0);
      REQUIRE(b.dlambda_dt == 0.0);
      REQUIRE(b.deta_dt == 0.0);
      REQUIRE(b.dlambda_dp == 0.0);
      REQUIRE(b.d2lambda_dtdp == 0.0);
    }
  }
}

TEST_CASE("weights always sum to one exactly", "[influence]") {
  for (auto fam : kFamilies) {
    for (int i = 0; i <= 200; ++i) {
      const double t = 1.3 * i / 200.0;
      const auto b = influence_at(fam, t, 0.0, 1.3);
      REQUIRE(b.lambda + b.eta == 1.0);
      REQUIRE(b.dlambda_dt + b.deta_dt == 0.0);
    }
  }
}

TEST_CASE("evaluation before the interval start is rejected", "[influence]") {
  REQUIRE_THROWS_AS(influence_at(InfluenceFamily::cubic, -0.1, 0.0, 1.0),
                    config_error);
  REQUIRE_THROWS_AS(influence_at(InfluenceFamily::cubic, 0.5, 0.0, 0.0),
                    config_error);
  REQUIRE_THROWS_AS(influence_at(InfluenceFamily::cubic, 0.5, 0.6, 0.4),
                    config_error);
}

TEST_CASE("time derivative of the fade matches finite differences",
          "[influence]") {
  const double h = 1e-6;
  for (auto fam : kFamilies) {
    for (double t : {0.1, 0.35, 0.62}) {
      const auto b = influence_at(fam, t, 0.0, 0.8);
      const double fd = (influence_at(fam, t + h, 0.0, 0.8).lambda -
                         influence_at(fam, t - h, 0.0, 0.8).lambda) /
                        (2 * h);
      REQUIRE(std::abs(b.dlambda_dt - fd) <= 1e-8);
    }
  }
}

TEST_CASE("pivot reparameterisation hits the documented example",
          "[influence]") {
  auto spec = InfluenceSpec::trainable(InfluenceFamily::cubic, 1.0, 2.0, 0.0);
  REQUIRE(spec.epsilon == 0.05);
  REQUIRE(reparam_p(0.0, spec) == Catch::Approx(1.525).margin(1e-12));
  // Saturation: a huge logit pushes the pivot to the top of the range.
  REQUIRE(reparam_p(100.0, spec) == Catch::Approx(2.0).margin(1e-12));
  // The pivot can never reach t_start: the floor is eps * (t_end - t_start).
  REQUIRE(reparam_p(-100.0, spec) == Catch::Approx(1.05).margin(1e-12));
}

TEST_CASE("pivot reparameterisation inverts cleanly", "[influence]") {
  auto spec = InfluenceSpec::trainable(InfluenceFamily::trig, 0.5, 3.0, 0.0);
  for (double p : {0.7, 1.2, 1.75, 2.6, 2.94}) {
    const double rho = inverse_reparam(p, spec);
    REQUIRE(std::abs(reparam_p(rho, spec) - p) <= 1e-10);
  }
  REQUIRE_THROWS_AS(inverse_reparam(0.55, spec), config_error);  // below floor
  REQUIRE_THROWS_AS(inverse_reparam(3.2, spec), config_error);   // above range
}

TEST_CASE("midpoint_rho puts the pivot mid-interval", "[influence]") {
  auto spec = InfluenceSpec::trainable(InfluenceFamily::cubic, 1.0, 2.0, 0.0);
  spec.rho = midpoint_rho(spec);
  REQUIRE(reparam_p(spec.rho, spec) == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("pivot sensitivities match finite differences", "[influence]") {
  const double h = 1e-6;
  for (auto fam : kFamilies) {
    auto spec = InfluenceSpec::trainable(fam, 0.0, 1.0, 0.3);
    auto specp = spec, specm = spec;
    specp.rho += h;
    specm.rho -= h;
    for (double t : {0.05, 0.2, 0.4}) {
      const auto b = influence_bundle(spec, t);
      const auto bp = influence_bundle(specp, t);
      const auto bm = influence_bundle(specm, t);
      const double drho = dp_drho(spec.rho, spec);
      // d lambda / d rho via the chain rule against central differences.
      const double fd_rho = (bp.lambda - bm.lambda) / (2 * h);
      REQUIRE(std::abs(b.dlambda_dp * drho - fd_rho) <= 1e-6);
      const double fd_trho = (bp.dlambda_dt - bm.dlambda_dt) / (2 * h);
      REQUIRE(std::abs(b.d2lambda_dtdp * drho - fd_trho) <= 1e-5);
    }
  }
}

TEST_CASE("fixed-pivot bundles carry no pivot sensitivity", "[influence]") {
  auto spec = InfluenceSpec::fixed_p(InfluenceFamily::cubic, 0.0, 1.0, 0.6);
  const auto b = influence_bundle(spec, 0.3);
  REQUIRE(b.dlambda_dp == 0.0);
  REQUIRE(b.deta_dp == 0.0);
  REQUIRE(b.d2lambda_dtdp == 0.0);
  REQUIRE(b.lambda ==
          influence_at(InfluenceFamily::cubic, 0.3, 0.0, 0.6).lambda);
}

TEST_CASE("influence spec validation rejects bad geometry", "[influence]") {
  // The factories validate eagerly, so the bad geometry throws at build time.
  REQUIRE_THROWS_AS(
      InfluenceSpec::fixed_p(InfluenceFamily::cubic, 1.0, 1.0, 1.0),
      config_error);
  REQUIRE_THROWS_AS(
      InfluenceSpec::fixed_p(InfluenceFamily::cubic, 0.0, 1.0, 0.0),
      config_error);
  REQUIRE_THROWS_AS(
      InfluenceSpec::fixed_p(InfluenceFamily::cubic, 0.0, 1.0, 1.4),
      config_error);
  REQUIRE_NOTHROW(InfluenceSpec::fixed_p(InfluenceFamily::cubic, 0.0, 1.0, 1.0)
                      .validate());
}
