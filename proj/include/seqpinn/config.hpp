#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seqpinn/errors.hpp"
#include "seqpinn/grid.hpp"  // fnv1a
#include "seqpinn/influence.hpp"
#include "seqpinn/network.hpp"
#include "seqpinn/problems.hpp"
#include "seqpinn/sampling.hpp"
#include "seqpinn/spectral.hpp"
#include "seqpinn/trainer.hpp"

namespace seqpinn {

/// How the horizon is split into training intervals.
struct ScheduleSpec {
  enum class Mode { count, nodes, adaptive };
  Mode mode = Mode::count;
  std::size_t count = 1;
  std::vector<double> nodes;  // explicit, must cover [0, horizon]
  double delta = 1e-3;        // adaptive
  std::uint32_t m_points = 10000;
};

/// A fully resolved run description: problem, horizon, schedule, network,
/// influence policy, training settings, oracle settings.
struct RunConfig {
  ProblemInfo problem;
  double horizon = 1.0;
  std::string precision = "f64";
  std::string out_dir;
  ScheduleSpec schedule;
  NetworkSpec network;
  TrainingConfig training;
  std::uint32_t oracle_nx = 0;
  double oracle_dt = 0.0;
  std::uint32_t oracle_frames = 201;
  std::uint32_t eval_nx = 256;
  std::uint32_t eval_nt = 201;

  void validate() const;
  std::vector<double> resolved_nodes() const;  // count/nodes modes only
  std::string echo() const;                    // canonical round-trippable text
  std::string hash() const;                    // FNV-1a of echo, hex
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' has non-numeric value '" +
                       v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw config_error("config: key '" + key + "' has non-integer value '" +
                       v + "'");
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw config_error("config: key '" + key + "' has non-integer value '" +
                       v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw config_error("config: key '" + key + "' must be true or false");
}

inline std::vector<double> parse_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_double(key, item));
  if (out.empty()) throw config_error("config: key '" + key + "' list is empty");
  return out;
}

/// key = value lines with [section] headers flattened to "section.key".
/// '#' starts a comment; keys may not repeat.
inline std::vector<std::pair<std::string, std::string>> parse_kv_text(
    std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::string section, line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config line " + std::to_string(lineno) +
                           ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw config_error("config line " + std::to_string(lineno) +
                           ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error("config line " + std::to_string(lineno) +
                         ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (!seen.insert(key).second)
      throw config_error("config: duplicate key '" + key + "'");
    entries.emplace_back(key, value);
  }
  return entries;
}

}  // namespace detail

inline void RunConfig::validate() const {
  if (!(horizon > 0)) throw config_error("config: horizon must be > 0");
  if (precision != "f64" && precision != "f32")
    throw config_error("config: precision must be f64 or f32");
  network.validate();
  training.validate();
  if (schedule.mode == ScheduleSpec::Mode::count) {
    if (schedule.count < 1)
      throw config_error("config: schedule.count must be >= 1");
  } else if (schedule.mode == ScheduleSpec::Mode::nodes) {
    if (schedule.nodes.size() < 2)
      throw config_error("config: schedule.nodes needs at least two entries");
    for (std::size_t i = 0; i + 1 < schedule.nodes.size(); ++i)
      if (!(schedule.nodes[i] < schedule.nodes[i + 1]))
        throw config_error("config: schedule.nodes must increase strictly");
    const double tol = 1e-12 * std::max(1.0, horizon);
    if (std::abs(schedule.nodes.front()) > tol ||
        std::abs(schedule.nodes.back() - horizon) > tol)
      throw config_error("config: schedule.nodes must cover [0, horizon]");
  } else {
    if (!(schedule.delta > 0))
      throw config_error("config: schedule.delta must be > 0");
    if (schedule.m_points < 1)
      throw config_error("config: schedule.M must be >= 1");
  }
  if (oracle_nx != 0 && (oracle_nx < 256 || (oracle_nx & (oracle_nx - 1)) != 0))
    throw config_error("config: oracle.nx must be a power of two >= 256");
  if (oracle_dt < 0) throw config_error("config: oracle.dt must be > 0");
  if (oracle_frames < 2) throw config_error("config: oracle.frames must be >= 2");
  if (eval_nx < 1 || eval_nt < 2)
    throw config_error("config: evaluation grid too small");
}

inline std::vector<double> RunConfig::resolved_nodes() const {
  switch (schedule.mode) {
    case ScheduleSpec::Mode::count:
      return uniform_nodes(horizon, schedule.count);
    case ScheduleSpec::Mode::nodes:
      return schedule.nodes;
    case ScheduleSpec::Mode::adaptive:
      throw config_error(
          "config: adaptive schedule must be resolved by the partitioner");
  }
  throw config_error("config: bad schedule mode");
}

/// Builds a RunConfig from flattened key/value entries. Unknown keys are
/// rejected by name; problem-specific defaults (network shape, weights,
/// oracle resolution) are resolved first and explicit keys override them.
inline RunConfig config_from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  using detail::parse_list;
  using detail::parse_u64;

  std::string problem_name_str;
  for (const auto& [k, v] : entries)
    if (k == "problem") problem_name_str = v;
  if (problem_name_str.empty())
    throw config_error("config: missing required key 'problem'");

  RunConfig cfg;
  cfg.problem = make_problem(problem_name_str);
  cfg.network = default_network_spec(cfg.problem);
  cfg.training.weights = default_weights(cfg.problem);
  cfg.oracle_nx = default_oracle_nx(cfg.problem);
  cfg.oracle_dt = default_oracle_dt(cfg.problem);

  bool have_horizon = false;
  for (const auto& [key, value] : entries) {
    if (key == "problem") {
      continue;
    } else if (key == "horizon") {
      cfg.horizon = parse_double(key, value);
      have_horizon = true;
    } else if (key == "precision") {
      cfg.precision = value;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "seed") {
      cfg.training.seed = parse_u64(key, value);
    } else if (key == "schedule.mode") {
      if (value == "count")
        cfg.schedule.mode = ScheduleSpec::Mode::count;
      else if (value == "nodes")
        cfg.schedule.mode = ScheduleSpec::Mode::nodes;
      else if (value == "adaptive")
        cfg.schedule.mode = ScheduleSpec::Mode::adaptive;
      else
        throw config_error("config: schedule.mode must be count, nodes, or "
                           "adaptive, got '" + value + "'");
    } else if (key == "schedule.count") {
      const long long n = parse_int(key, value);
      if (n < 1) throw config_error("config: schedule.count must be >= 1");
      cfg.schedule.count = static_cast<std::size_t>(n);
    } else if (key == "schedule.nodes") {
      cfg.schedule.nodes = parse_list(key, value);
    } else if (key == "schedule.delta") {
      cfg.schedule.delta = parse_double(key, value);
    } else if (key == "schedule.M") {
      const long long n = parse_int(key, value);
      if (n < 1) throw config_error("config: schedule.M must be >= 1");
      cfg.schedule.m_points = static_cast<std::uint32_t>(n);
    } else if (key == "network.depth") {
      cfg.network.depth = static_cast<int>(parse_int(key, value));
    } else if (key == "network.width") {
      cfg.network.width = static_cast<int>(parse_int(key, value));
    } else if (key == "network.embedding") {
      if (value == "fourier")
        cfg.network.embedding = Embedding::fourier;
      else if (value == "raw")
        cfg.network.embedding = Embedding::raw;
      else
        throw config_error("config: network.embedding must be fourier or raw");
    } else if (key == "network.fourier_modes") {
      cfg.network.fourier_modes = static_cast<int>(parse_int(key, value));
    } else if (key == "influence.family") {
      cfg.training.family = parse_family(value);
    } else if (key == "influence.p_mode") {
      if (value == "trainable")
        cfg.training.pivot = PivotPolicy::trainable();
      else if (value == "fixed")
        cfg.training.pivot.kind = PivotPolicy::Kind::fixed;
      else
        throw config_error("config: influence.p_mode must be trainable or fixed");
    } else if (key == "influence.p_fraction") {
      const double f = parse_double(key, value);
      if (!(f > 0 && f <= 1))
        throw config_error("config: influence.p_fraction must lie in (0, 1]");
      cfg.training.pivot.fraction = f;
    } else if (key == "training.w_i") {
      cfg.training.weights.w_i = parse_double(key, value);
    } else if (key == "training.w_b") {
      cfg.training.weights.w_b = parse_double(key, value);
    } else if (key == "training.w_r") {
      cfg.training.weights.w_r = parse_double(key, value);
    } else if (key == "training.n_initial") {
      cfg.training.n_initial = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "training.n_boundary") {
      cfg.training.n_boundary = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "training.n_residual") {
      cfg.training.n_residual = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "training.sampling") {
      cfg.training.sampling = parse_sampling(value);
    } else if (key == "training.adam_iters") {
      cfg.training.adam.iters = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "training.adam_lr") {
      cfg.training.adam.lr = parse_double(key, value);
    } else if (key == "training.lbfgs_history") {
      cfg.training.lbfgs.history =
          static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "training.lbfgs_max_iters") {
      cfg.training.lbfgs.max_iters =
          static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "training.lbfgs_grad_tol") {
      cfg.training.lbfgs.grad_tol = parse_double(key, value);
    } else if (key == "training.lbfgs_loss_rel_tol") {
      cfg.training.lbfgs.loss_rel_tol = parse_double(key, value);
    } else if (key == "training.warm_start") {
      cfg.training.warm_start = parse_bool(key, value);
    } else if (key == "oracle.nx") {
      cfg.oracle_nx = static_cast<std::uint32_t>(parse_int(key, value));
    } else if (key == "oracle.dt") {
      cfg.oracle_dt = parse_double(key, value);
    } else if (key == "oracle.frames") {
      cfg.oracle_frames = static_cast<std::uint32_t>(parse_int(key, value));
    } else if (key == "evaluation.nx") {
      cfg.eval_nx = static_cast<std::uint32_t>(parse_int(key, value));
    } else if (key == "evaluation.nt") {
      cfg.eval_nt = static_cast<std::uint32_t>(parse_int(key, value));
    } else {
      throw config_error("config: unknown key '" + key + "'");
    }
  }
  if (!have_horizon)
    throw config_error("config: missing required key 'horizon'");

  // Fourier features stay commensurate with the domain when not overridden.
  if (cfg.network.embedding == Embedding::fourier)
    cfg.network.fourier_period = cfg.problem.x_hi - cfg.problem.x_lo;

  cfg.validate();
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  return config_from_entries(detail::parse_kv_text(in));
}

inline std::string RunConfig::echo() const {
  std::ostringstream o;
  auto g17 = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  o << "problem = " << problem_name(problem.id) << '\n';
  o << "horizon = " << g17(horizon) << '\n';
  o << "precision = " << precision << '\n';
  o << "seed = " << training.seed << '\n';
  o << "\n[schedule]\n";
  switch (schedule.mode) {
    case ScheduleSpec::Mode::count:
      o << "mode = count\ncount = " << schedule.count << '\n';
      break;
    case ScheduleSpec::Mode::nodes: {
      o << "mode = nodes\nnodes = ";
      for (std::size_t i = 0; i < schedule.nodes.size(); ++i)
        o << (i ? "," : "") << g17(schedule.nodes[i]);
      o << '\n';
      break;
    }
    case ScheduleSpec::Mode::adaptive:
      o << "mode = adaptive\ndelta = " << g17(schedule.delta)
        << "\nM = " << schedule.m_points << '\n';
      break;
  }
  o << "\n[network]\n";
  o << "depth = " << network.depth << '\n';
  o << "width = " << network.width << '\n';
  o << "embedding = "
    << (network.embedding == Embedding::fourier ? "fourier" : "raw") << '\n';
  o << "fourier_modes = " << network.fourier_modes << '\n';
  o << "\n[influence]\n";
  o << "family = " << family_name(training.family) << '\n';
  o << "p_mode = "
    << (training.pivot.kind == PivotPolicy::Kind::trainable ? "trainable"
                                                            : "fixed")
    << '\n';
  o << "p_fraction = " << g17(training.pivot.fraction) << '\n';
  o << "\n[training]\n";
  o << "w_i = " << g17(training.weights.w_i) << '\n';
  o << "w_b = " << g17(training.weights.w_b) << '\n';
  o << "w_r = " << g17(training.weights.w_r) << '\n';
  o << "n_initial = " << training.n_initial << '\n';
  o << "n_boundary = " << training.n_boundary << '\n';
  o << "n_residual = " << training.n_residual << '\n';
  o << "sampling = " << sampling_name(training.sampling) << '\n';
  o << "adam_iters = " << training.adam.iters << '\n';
  o << "adam_lr = " << g17(training.adam.lr) << '\n';
  o << "lbfgs_history = " << training.lbfgs.history << '\n';
  o << "lbfgs_max_iters = " << training.lbfgs.max_iters << '\n';
  o << "lbfgs_grad_tol = " << g17(training.lbfgs.grad_tol) << '\n';
  o << "lbfgs_loss_rel_tol = " << g17(training.lbfgs.loss_rel_tol) << '\n';
  o << "warm_start = " << (training.warm_start ? "true" : "false") << '\n';
  o << "\n[oracle]\n";
  o << "nx = " << oracle_nx << '\n';
  o << "dt = " << g17(oracle_dt) << '\n';
  o << "frames = " << oracle_frames << '\n';
  o << "\n[evaluation]\n";
  o << "nx = " << eval_nx << '\n';
  o << "nt = " << eval_nt << '\n';
  return o.str();
}

inline std::string RunConfig::hash() const {
  const std::string text = echo();
  const std::uint64_t h =
      fnv1a(reinterpret_cast<const unsigned char*>(text.data()), text.size());
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace seqpinn
