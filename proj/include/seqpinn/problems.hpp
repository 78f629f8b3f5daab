#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "seqpinn/diff.hpp"
#include "seqpinn/errors.hpp"
#include "seqpinn/network.hpp"

namespace seqpinn {

enum class Problem { convection, allen_cahn, kdv };

inline Problem parse_problem(std::string_view name) {
  if (name == "convection") return Problem::convection;
  if (name == "allen_cahn") return Problem::allen_cahn;
  if (name == "kdv") return Problem::kdv;
  throw config_error("unknown problem '" + std::string(name) +
                     "' (expected convection, allen_cahn, or kdv)");
}

inline const char* problem_name(Problem p) {
  switch (p) {
    case Problem::convection: return "convection";
    case Problem::allen_cahn: return "allen_cahn";
    default: return "kdv";
  }
}

/// Static description of one benchmark equation: domain, highest spatial
/// derivative appearing in the residual, which derivative orders the
/// periodic boundary matches, and the physical constants.
struct ProblemInfo {
  Problem id = Problem::convection;
  double x_lo = 0.0, x_hi = 2.0 * std::numbers::pi;
  int max_x_order = 1;
  std::vector<int> match_orders = {0};
  double beta = 40.0;          // convection speed
  double diffusivity = 1e-4;   // Allen-Cahn
  double reaction = 5.0;       // Allen-Cahn double-well strength
  double dispersion = 0.0025;  // KdV third-derivative coefficient
  bool has_exact = false;
};

inline ProblemInfo make_problem(Problem p) {
  ProblemInfo info;
  info.id = p;
  switch (p) {
    case Problem::convection:
      info.x_lo = 0.0;
      info.x_hi = 2.0 * std::numbers::pi;
      info.max_x_order = 1;
      info.match_orders = {0};
      info.has_exact = true;
      break;
    case Problem::allen_cahn:
      info.x_lo = -1.0;
      info.x_hi = 1.0;
      info.max_x_order = 2;
      info.match_orders = {0, 1};
      break;
    case Problem::kdv:
      info.x_lo = -1.0;
      info.x_hi = 1.0;
      info.max_x_order = 3;
      info.match_orders = {0, 1};
      break;
  }
  return info;
}

inline ProblemInfo make_problem(std::string_view name) {
  return make_problem(parse_problem(name));
}

namespace detail {
inline void require_order(const ProblemInfo& info, int have) {
  if (have < info.max_x_order)
    throw config_error(std::string("problem ") + problem_name(info.id) +
                       " needs spatial derivatives up to order " +
                       std::to_string(info.max_x_order) + ", bundle carries " +
                       std::to_string(have));
}
}  // namespace detail

/// PDE residual at one point, written so that an exact solution gives zero.
/// The convection equation is u_t + beta*u_x = 0, the sign under which
/// sin(x - beta*t) is the exact solution.
template <class Real>
Real residual(const ProblemInfo& info, const Bundle<Real>& b) {
  detail::require_order(info, b.x_order);
  switch (info.id) {
    case Problem::convection:
      return b.u_t + Real(info.beta) * b.u_x;
    case Problem::allen_cahn:
      return b.u_t - Real(info.diffusivity) * b.u_xx +
             Real(info.reaction) * (b.u * b.u * b.u - b.u);
    default:  // kdv
      return b.u_t + b.u * b.u_x + Real(info.dispersion) * b.u_xxx;
  }
}

/// Partial derivatives of the residual with respect to each bundle entry,
/// returned in the corresponding bundle fields (u field holds dr/du, etc.).
template <class Real>
Bundle<Real> residual_gradient(const ProblemInfo& info, const Bundle<Real>& b) {
  detail::require_order(info, b.x_order);
  Bundle<Real> g;
  g.x_order = b.x_order;
  g.u_t = Real(1);
  switch (info.id) {
    case Problem::convection:
      g.u_x = Real(info.beta);
      break;
    case Problem::allen_cahn:
      g.u = Real(info.reaction) * (Real(3) * b.u * b.u - Real(1));
      g.u_xx = Real(-info.diffusivity);
      break;
    default:  // kdv
      g.u = b.u_x;
      g.u_x = b.u;
      g.u_xxx = Real(info.dispersion);
      break;
  }
  return g;
}

inline double initial_condition(const ProblemInfo& info, double x) {
  switch (info.id) {
    case Problem::convection:
      return std::sin(x);
    case Problem::allen_cahn:
      return x * x * std::cos(std::numbers::pi * x);
    default:  // kdv
      return std::cos(std::numbers::pi * x);
  }
}

/// Periodic mismatches u^(k)(x_lo,t) - u^(k)(x_hi,t), one per matched order.
template <class Real>
std::vector<Real> boundary_residuals(const ProblemInfo& info,
                                     const Bundle<Real>& lo,
                                     const Bundle<Real>& hi) {
  std::vector<Real> out;
  out.reserve(info.match_orders.size());
  for (int order : info.match_orders) {
    switch (order) {
      case 0: out.push_back(lo.u - hi.u); break;
      case 1:
        detail::require_order(info, std::min(lo.x_order, hi.x_order));
        out.push_back(lo.u_x - hi.u_x);
        break;
      default:
        throw config_error("boundary matching beyond first derivative is not supported");
    }
  }
  return out;
}

inline double exact_solution(const ProblemInfo& info, double x, double t) {
  if (info.id != Problem::convection)
    throw no_exact_solution_error(
        std::string("problem ") + problem_name(info.id) +
        " has no closed-form solution; use a reference grid");
  return std::sin(x - info.beta * t);
}

struct LossWeights {
  double w_i = 1.0, w_b = 1.0, w_r = 1.0;
};

/// Benchmark network geometry and loss weights for each equation.
inline NetworkSpec default_network_spec(const ProblemInfo& info) {
  NetworkSpec spec;
  switch (info.id) {
    case Problem::convection:
      spec.depth = 4;
      spec.width = 40;
      spec.embedding = Embedding::fourier;
      spec.fourier_modes = 10;
      spec.fourier_period = info.x_hi - info.x_lo;
      break;
    case Problem::allen_cahn:
      spec.depth = 4;
      spec.width = 40;
      spec.embedding = Embedding::fourier;
      spec.fourier_modes = 10;
      spec.fourier_period = info.x_hi - info.x_lo;
      break;
    case Problem::kdv:
      spec.depth = 3;
      spec.width = 50;
      spec.embedding = Embedding::raw;
      break;
  }
  return spec;
}

inline LossWeights default_weights(const ProblemInfo& info) {
  LossWeights w;
  if (info.id == Problem::allen_cahn) w.w_i = 100.0;
  return w;
}

}  // namespace seqpinn
