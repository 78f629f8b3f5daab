#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "seqpinn/errors.hpp"

namespace seqpinn {

enum class InfluenceFamily { trig, cubic, quintic };

inline InfluenceFamily parse_family(std::string_view name) {
  if (name == "trig") return InfluenceFamily::trig;
  if (name == "cubic") return InfluenceFamily::cubic;
  if (name == "quintic") return InfluenceFamily::quintic;
  throw config_error("unknown influence family '" + std::string(name) +
                     "' (expected trig, cubic, or quintic)");
}

inline const char* family_name(InfluenceFamily f) {
  switch (f) {
    case InfluenceFamily::trig: return "trig";
    case InfluenceFamily::cubic: return "cubic";
    default: return "quintic";
  }
}

/// Blending weight configuration for one time interval. The transition
/// parameter p is either fixed or carried through a sigmoid
/// reparameterization so an unconstrained optimizer cannot push it outside
/// (t_start + epsilon*(t_end-t_start), t_end).
struct InfluenceSpec {
  enum class PMode { fixed, trainable };

  InfluenceFamily family = InfluenceFamily::cubic;
  double t_start = 0.0;
  double t_end = 1.0;
  PMode p_mode = PMode::fixed;
  double p = 1.0;          // used when p_mode == fixed
  double rho = 0.0;        // used when p_mode == trainable
  double epsilon = 0.05;   // margin of the trainable reparameterization

  static InfluenceSpec fixed_p(InfluenceFamily fam, double t0, double t1,
                               double p_value) {
    InfluenceSpec s;
    s.family = fam;
    s.t_start = t0;
    s.t_end = t1;
    s.p_mode = PMode::fixed;
    s.p = p_value;
    s.validate();
    return s;
  }

  static InfluenceSpec trainable(InfluenceFamily fam, double t0, double t1,
                                 double rho0, double eps = 0.05) {
    InfluenceSpec s;
    s.family = fam;
    s.t_start = t0;
    s.t_end = t1;
    s.p_mode = PMode::trainable;
    s.rho = rho0;
    s.epsilon = eps;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(t_start < t_end))
      throw config_error("influence: t_start must be < t_end");
    if (p_mode == PMode::fixed) {
      if (!(p > t_start && p <= t_end))
        throw config_error("influence: fixed p must lie in (t_start, t_end]");
    } else {
      if (!(epsilon >= 0.0 && epsilon < 0.5))
        throw config_error("influence: epsilon must lie in [0, 0.5)");
      if (!std::isfinite(rho)) throw numeric_error("influence: non-finite rho");
    }
  }

  double resolved_p() const;
};

inline double sigmoid(double x) { return 0.5 * (1.0 + std::tanh(0.5 * x)); }

inline double reparam_p(double rho, const InfluenceSpec& spec) {
  const double dt = spec.t_end - spec.t_start;
  return spec.t_start + dt * (spec.epsilon + (1.0 - spec.epsilon) * sigmoid(rho));
}

inline double dp_drho(double rho, const InfluenceSpec& spec) {
  const double s = sigmoid(rho);
  return (spec.t_end - spec.t_start) * (1.0 - spec.epsilon) * s * (1.0 - s);
}

inline double inverse_reparam(double p, const InfluenceSpec& spec) {
  const double q = (p - spec.t_start) / (spec.t_end - spec.t_start);
  const double s = (q - spec.epsilon) / (1.0 - spec.epsilon);
  if (!(s > 0.0 && s < 1.0))
    throw config_error("influence: p is outside the reachable range of the "
                       "reparameterization");
  return std::log(s / (1.0 - s));
}

/// rho whose reparameterized p is the interval midpoint (the training
/// initialization anchor).
inline double midpoint_rho(const InfluenceSpec& spec) {
  return inverse_reparam(0.5 * (spec.t_start + spec.t_end), spec);
}

inline double InfluenceSpec::resolved_p() const {
  return p_mode == PMode::fixed ? p : reparam_p(rho, *this);
}

/// Influence weight and its derivatives at one time. eta is the exact
/// complement 1 - lambda; the dp entries are zero in fixed-p mode. The mixed
/// t-p derivative is carried because the time-derivative of the composed
/// field depends on p, so its gradient needs d(dlambda/dt)/dp.
struct InfluenceBundle {
  double lambda = 0, eta = 1;
  double dlambda_dt = 0, deta_dt = 0;
  double dlambda_dp = 0, deta_dp = 0;
  double d2lambda_dtdp = 0;
};

namespace detail {

struct FamilyJet {
  double f, fp, fpp;  // f(s), f'(s), f''(s)
};

inline FamilyJet family_jet(InfluenceFamily fam, double s) {
  switch (fam) {
    case InfluenceFamily::cubic:
      return {1.0 + s * s * (2.0 * s - 3.0), 6.0 * s * (s - 1.0), 12.0 * s - 6.0};
    case InfluenceFamily::trig: {
      const double pi = std::numbers::pi;
      return {0.5 * (1.0 + std::cos(pi * s)), -0.5 * pi * std::sin(pi * s),
              -0.5 * pi * pi * std::cos(pi * s)};
    }
    default:  // quintic
      return {1.0 + s * s * s * (-6.0 * s * s + 15.0 * s - 10.0),
              -30.0 * s * s * (s - 1.0) * (s - 1.0),
              -60.0 * s * (2.0 * s - 1.0) * (s - 1.0)};
  }
}

}  // namespace detail

/// Weight bundle for a given transition parameter, independent of how p is
/// parameterized. Clamped branch (t >= p): lambda = 0 with all derivatives
/// zero — the kink at t = p is measure-zero in the collocation sums and the
/// zero subgradient is used there so runs are reproducible.
inline InfluenceBundle influence_at(InfluenceFamily fam, double t,
                                    double t_start, double p) {
  if (!(p > t_start))
    throw config_error("influence: transition parameter must exceed t_start");
  if (t < t_start)
    throw config_error("influence: evaluation time precedes interval start");

  InfluenceBundle b;
  if (t >= p) {
    b.lambda = 0.0;
    b.eta = 1.0;
    return b;
  }
  const double L = p - t_start;
  const double s = (t - t_start) / L;
  const auto [f, fp, fpp] = detail::family_jet(fam, s);
  b.lambda = std::min(1.0, std::max(0.0, f));
  b.eta = 1.0 - b.lambda;
  b.dlambda_dt = fp / L;
  b.deta_dt = -b.dlambda_dt;
  b.dlambda_dp = -fp * s / L;
  b.deta_dp = -b.dlambda_dp;
  b.d2lambda_dtdp = -(fpp * s + fp) / (L * L);
  return b;
}

inline InfluenceBundle influence_bundle(const InfluenceSpec& spec, double t) {
  spec.validate();
  InfluenceBundle b = influence_at(spec.family, t, spec.t_start, spec.resolved_p());
  if (spec.p_mode == InfluenceSpec::PMode::fixed) {
    b.dlambda_dp = 0.0;
    b.deta_dp = 0.0;
    b.d2lambda_dtdp = 0.0;
  }
  return b;
}

/// Second time derivative on the smooth branch; used by the endpoint
/// smoothness checks of the quintic family.
inline double influence_d2lambda_dt2(InfluenceFamily fam, double t,
                                     double t_start, double p) {
  if (t >= p) return 0.0;
  const double L = p - t_start;
  const double s = (t - t_start) / L;
  return detail::family_jet(fam, s).fpp / (L * L);
}

struct ConditionCheck {
  std::string name;
  bool pass = false;
  double violation = 0;
};

struct ConditionReport {
  std::vector<ConditionCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  double worst() const {
    double w = 0;
    for (const auto& c : checks) w = std::max(w, c.violation);
    return w;
  }
};

/// Weight-shape probe: the normalized profile f(s) on [0, 1] and its first
/// two derivatives in s. verify_conditions runs against a probe so that the
/// checker itself can be validated against deliberately malformed profiles.
struct InfluenceProbe {
  std::function<double(double)> value;       // f(s)
  std::function<double(double)> slope;       // f'(s)
  std::function<double(double)> curvature;   // f''(s), may be empty
};

/// Numerically verifies the defining conditions of a weight profile on
/// s in [0, 1]: unit start value, zero start slope, zero end value, zero end
/// slope, and monotone nonincrease on a 1001-point grid. When a curvature
/// probe is supplied, vanishing curvature at both ends is also required
/// (the quintic family's extra smoothness conditions).
inline ConditionReport verify_conditions(const InfluenceProbe& probe,
                                         double length) {
  if (!(length > 0)) throw config_error("influence: probe length must be > 0");
  ConditionReport rep;
  auto add = [&rep](std::string name, double violation, double tol) {
    rep.checks.push_back({std::move(name), violation <= tol, violation});
  };

  add("value_at_start_equals_one", std::abs(probe.value(0.0) - 1.0), 1e-12);
  add("slope_at_start_is_zero", std::abs(probe.slope(0.0) / length), 1e-12);
  add("value_at_p_is_zero", std::abs(probe.value(1.0)), 1e-12);
  add("slope_at_p_is_zero", std::abs(probe.slope(1.0) / length), 1e-12);

  double worst_increase = 0.0;
  double prev = probe.value(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double cur = probe.value(static_cast<double>(i) / 1000.0);
    worst_increase = std::max(worst_increase, cur - prev);
    prev = cur;
  }
  add("monotone_nonincreasing", worst_increase, 1e-12);

  if (probe.curvature) {
    add("curvature_at_start_is_zero",
        std::abs(probe.curvature(0.0) / (length * length)), 1e-10);
    add("curvature_at_p_is_zero",
        std::abs(probe.curvature(1.0) / (length * length)), 1e-10);
  }
  return rep;
}

/// Checks the defining conditions of an influence family on [t_start, p].
inline ConditionReport verify_conditions(const InfluenceSpec& spec) {
  spec.validate();
  const double p = spec.resolved_p();
  InfluenceProbe probe;
  probe.value = [&spec](double s) { return detail::family_jet(spec.family, s).f; };
  probe.slope = [&spec](double s) { return detail::family_jet(spec.family, s).fp; };
  if (spec.family == InfluenceFamily::quintic)
    probe.curvature = [&spec](double s) {
      return detail::family_jet(spec.family, s).fpp;
    };
  return verify_conditions(probe, p - spec.t_start);
}

}  // namespace seqpinn
