// Command-line front end: train / partition / evaluate / oracle / compare.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <list>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqpinn/seqpinn.hpp"

namespace fs = std::filesystem;
using namespace seqpinn;

namespace {

constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 ok, 2 config, 3 training/numerics, 4 I/O and formats,
// 5 failed --assert.
constexpr int kExitConfig = 2;
constexpr int kExitTraining = 3;
constexpr int kExitIo = 4;
constexpr int kExitAssert = 5;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// Validates SEQPINN_THREADS and returns the cap (the solver itself runs a
/// single deterministic worker, which always respects it).
int thread_cap() {
  const char* env = std::getenv("SEQPINN_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw config_error("SEQPINN_THREADS must be a positive integer");
  return static_cast<int>(v);
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> precision;
  std::string out_dir;
};

RunConfig load_run_config(const CommonFlags& flags) {
  RunConfig cfg = parse_config(flags.config_path);
  if (flags.seed) cfg.training.seed = *flags.seed;
  if (flags.precision) cfg.precision = *flags.precision;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  cfg.validate();
  return cfg;
}

void write_reproducibility_record(const RunConfig& cfg, const fs::path& dir,
                                  const std::string& command) {
  std::ofstream rec(dir / "run.txt", std::ios::binary);
  if (!rec) throw format_error("cannot write " + (dir / "run.txt").string());
  rec << "command: " << command << '\n';
  rec << "version: " << kVersion << '\n';
  rec << "compiler: " << __VERSION__ << '\n';
  rec << "threads: " << thread_cap() << '\n';
  rec << "config_hash: " << cfg.hash() << '\n';
  rec << "--- config ---\n" << cfg.echo();
  if (!rec.flush()) throw format_error("write failed: run.txt");
}

TruthFn make_truth(const RunConfig& cfg, const std::string& ref_path,
                   std::list<ReferenceGrid>& keep_alive) {
  if (!ref_path.empty()) {
    keep_alive.push_back(load_grid(ref_path));
    const ReferenceGrid& g = keep_alive.back();
    return [&g](double x, double t) { return interpolate(g, x, t); };
  }
  if (cfg.problem.has_exact) {
    const ProblemInfo info = cfg.problem;
    return [info](double x, double t) { return exact_solution(info, x, t); };
  }
  // Fall back to the built-in pseudospectral reference.
  std::cout << "computing reference grid (nx=" << cfg.oracle_nx
            << ", dt=" << cfg.oracle_dt << ")...\n";
  keep_alive.push_back(solve_spectral(cfg.problem, cfg.oracle_nx,
                                      cfg.oracle_dt, cfg.horizon,
                                      cfg.oracle_frames));
  const ReferenceGrid& g = keep_alive.back();
  return [&g](double x, double t) { return interpolate(g, x, t); };
}

void print_report(const std::string& label, const ErrorReport& rep) {
  std::cout << label << ": l2_rel=" << fmt("%.4e", rep.l2_rel)
            << "  l1=" << fmt("%.4e", rep.l1)
            << "  linf=" << fmt("%.4e", rep.linf) << "  (" << rep.nx << "x"
            << rep.nt << " grid)\n";
}

void print_solution_summary(const ComposedSolution& sol) {
  std::cout << "trained " << sol.intervals.size() << " interval(s), precision "
            << sol.precision << "\n";
  for (const TrainedInterval& iv : sol.intervals) {
    std::cout << "  interval " << iv.index << " [" << fmt("%.6g", iv.t_lo)
              << ", " << fmt("%.6g", iv.t_hi) << "]";
    if (iv.influence)
      std::cout << "  p=" << fmt("%.6g", iv.resolved_p())
                << (iv.influence->p_mode == InfluenceSpec::PMode::trainable
                        ? " (trained)"
                        : " (fixed)");
    std::cout << "  loss=" << fmt("%.4e", iv.final_losses.total)
              << "  lbfgs_iters=" << iv.summary.lbfgs_iterations << '\n';
  }
}

ComposedSolution train_with_precision(const RunConfig& cfg,
                                      const std::vector<double>& nodes) {
  if (cfg.precision == "f32")
    return train_sequence<float>(cfg.problem, nodes, cfg.network, cfg.training);
  return train_sequence<double>(cfg.problem, nodes, cfg.network, cfg.training);
}

void print_partition_table(const PartitionResult& res, double horizon) {
  std::cout << "         T        T/2      initial interval            D  intervals\n";
  for (const PartitionEntry& e : res.history) {
    const double half = e.T / 2;
    const std::string span = "[0, " + fmt("%.6g", half) + "]";
    std::printf("%10.4f %10.4f %21s %12.4e %10.0f\n", e.T, half, span.c_str(),
                e.D, std::ceil(horizon / half - 1e-12));
  }
  std::cout << "chosen interval length " << fmt("%.6g", res.interval_length)
            << " -> " << res.interval_count << " interval(s)";
  if (res.hit_floor) std::cout << "  [warning: halving floor reached]";
  std::cout << '\n';
}

int cmd_train(const CommonFlags& flags, const std::string& ref_path,
              const std::string& command) {
  RunConfig cfg = load_run_config(flags);
  if (cfg.out_dir.empty())
    throw config_error("train: an output directory is required (out= or --out)");
  DirectoryLock lock(cfg.out_dir);
  write_reproducibility_record(cfg, cfg.out_dir, command);

  std::vector<double> nodes;
  if (cfg.schedule.mode == ScheduleSpec::Mode::adaptive) {
    TrainerPartitionSolver solver(cfg.problem, cfg.network, cfg.training);
    PartitionConfig pc;
    pc.t_init = cfg.horizon;
    pc.delta = cfg.schedule.delta;
    pc.m_points = cfg.schedule.m_points;
    pc.seed = cfg.training.seed;
    const PartitionResult res = adapt_partition(cfg.problem, pc, solver);
    print_partition_table(res, cfg.horizon);
    nodes = uniform_nodes(cfg.horizon, res.interval_count);
  } else {
    nodes = cfg.resolved_nodes();
  }

  const ComposedSolution sol = train_with_precision(cfg, nodes);
  print_solution_summary(sol);
  save_checkpoint(sol, fs::path(cfg.out_dir) / "checkpoint");

  std::list<ReferenceGrid> keep;
  const TruthFn truth = make_truth(cfg, ref_path, keep);
  const ErrorReport rep = error_report(sol, truth, cfg.eval_nx, cfg.eval_nt);
  print_report("errors", rep);
  emit_solution_grid(sol, (fs::path(cfg.out_dir) / "solution.csv").string(),
                     cfg.eval_nx, cfg.eval_nt, &truth);
  return 0;
}

int cmd_partition(const std::string& problem, double t_init, double delta,
                  std::uint32_t m_points, const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = load_run_config(flags);
  } else {
    std::vector<std::pair<std::string, std::string>> entries = {
        {"problem", problem}, {"horizon", fmt("%.17g", t_init)}};
    cfg = config_from_entries(entries);
    if (flags.seed) cfg.training.seed = *flags.seed;
  }

  TrainerPartitionSolver solver(cfg.problem, cfg.network, cfg.training);
  PartitionConfig pc;
  pc.t_init = t_init;
  pc.delta = delta;
  pc.m_points = m_points;
  pc.seed = cfg.training.seed;
  const PartitionResult res = adapt_partition(cfg.problem, pc, solver);
  print_partition_table(res, t_init);
  return 0;
}

int cmd_evaluate(const std::string& checkpoint_dir, const std::string& ref_path,
                 const std::string& out_dir, std::uint32_t nx,
                 std::uint32_t nt) {
  const ComposedSolution sol = load_checkpoint(checkpoint_dir);
  std::vector<std::pair<std::string, std::string>> entries = {
      {"problem", problem_name(sol.problem.id)},
      {"horizon", fmt("%.17g", sol.intervals.back().t_hi)}};
  RunConfig cfg = config_from_entries(entries);

  std::list<ReferenceGrid> keep;
  const TruthFn truth = make_truth(cfg, ref_path, keep);
  const ErrorReport rep = error_report(sol, truth, nx, nt);
  print_report("errors", rep);
  for (const IntervalError& ie : rep.per_interval)
    std::cout << "  interval " << ie.index << ": l2_rel="
              << fmt("%.4e", ie.l2_rel) << " (" << ie.samples << " samples)\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    emit_solution_grid(sol, (fs::path(out_dir) / "solution.csv").string(), nx,
                       nt, &truth);
  }
  return 0;
}

int cmd_oracle(const std::string& problem, std::uint32_t nx, double dt,
               double horizon, std::uint32_t frames, const std::string& out) {
  const ProblemInfo info = make_problem(problem);
  const std::uint32_t use_nx = nx ? nx : default_oracle_nx(info);
  const double use_dt = dt > 0 ? dt : default_oracle_dt(info);
  std::cout << "solving " << problem << " with nx=" << use_nx
            << " dt=" << use_dt << " T=" << horizon << "...\n";
  const ReferenceGrid grid = solve_spectral(info, use_nx, use_dt, horizon, frames);
  save_grid(grid, out);
  std::cout << "wrote " << out << " (" << grid.nx << "x" << grid.nt << ")\n";
  return 0;
}

int cmd_compare(const CommonFlags& flags, const std::string& ref_path,
                bool do_assert, double threshold, const std::string& command) {
  RunConfig cfg = load_run_config(flags);
  const std::vector<double> nodes = cfg.resolved_nodes();
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_reproducibility_record(cfg, cfg.out_dir, command);
  }

  std::list<ReferenceGrid> keep;
  const TruthFn truth = make_truth(cfg, ref_path, keep);

  // Standard: one soft network over the whole horizon.
  RunConfig std_cfg = cfg;
  const ComposedSolution std_sol = train_with_precision(
      std_cfg, {nodes.front(), nodes.back()});
  const ErrorReport std_rep =
      error_report(std_sol, truth, cfg.eval_nx, cfg.eval_nt);

  RunConfig fhc_cfg = cfg;
  fhc_cfg.training.pivot = PivotPolicy::fixed(
      cfg.training.pivot.kind == PivotPolicy::Kind::fixed
          ? cfg.training.pivot.fraction
          : 1.0);
  const ComposedSolution fhc_sol = train_with_precision(fhc_cfg, nodes);
  const ErrorReport fhc_rep =
      error_report(fhc_sol, truth, cfg.eval_nx, cfg.eval_nt);

  RunConfig thc_cfg = cfg;
  thc_cfg.training.pivot = PivotPolicy::trainable();
  const ComposedSolution thc_sol = train_with_precision(thc_cfg, nodes);
  const ErrorReport thc_rep =
      error_report(thc_sol, truth, cfg.eval_nx, cfg.eval_nt);

  std::cout << "method         l2_rel        l1          linf\n";
  std::printf("standard   %12.4e %12.4e %12.4e\n", std_rep.l2_rel, std_rep.l1,
              std_rep.linf);
  std::printf("fhc        %12.4e %12.4e %12.4e\n", fhc_rep.l2_rel, fhc_rep.l1,
              fhc_rep.linf);
  std::printf("thc        %12.4e %12.4e %12.4e\n", thc_rep.l2_rel, thc_rep.l1,
              thc_rep.linf);
  std::cout << "thc transition points:";
  for (const TrainedInterval& iv : thc_sol.intervals)
    if (iv.influence) std::cout << ' ' << fmt("%.6g", iv.resolved_p());
  std::cout << '\n';

  if (do_assert && !(thc_rep.l2_rel <= threshold)) {
    std::cerr << "ASSERT FAILED: thc l2_rel " << fmt("%.4e", thc_rep.l2_rel)
              << " > threshold " << fmt("%.4e", threshold) << '\n';
    return kExitAssert;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential sub-domain solver for 1D evolutionary PDEs"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string ref_path, problem, checkpoint_dir, oracle_out;
  double t_init = 1.0, delta = 1e-3, horizon = 1.0, threshold = 2e-2, dt = 0.0;
  std::uint32_t m_points = 10000, nx = 0, frames = 201, eval_nx = 256,
                eval_nt = 201;
  bool do_assert = false;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", flags.config_path, "config file");
    if (need_config) c->required();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { flags.seed = s; }, "master seed");
    sub->add_option_function<std::string>(
           "--precision",
           [&](const std::string& p) { flags.precision = p; },
           "f64 or f32")
        ->check(CLI::IsMember({"f64", "f32"}));
    sub->add_option("--out", flags.out_dir, "output directory");
  };

  CLI::App* train = app.add_subcommand("train", "train a sequential solution");
  add_common(train, true);
  train->add_option("--ref", ref_path, "reference grid file");

  CLI::App* part = app.add_subcommand("partition", "adaptive interval search");
  part->add_option("--problem", problem, "problem name")->required();
  part->add_option("--T-init", t_init, "initial interval length")->required();
  part->add_option("--delta", delta, "discrepancy threshold")->required();
  part->add_option("--M", m_points, "collocation count for the discrepancy");
  add_common(part, false);

  CLI::App* eval = app.add_subcommand("evaluate", "evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint_dir, "checkpoint directory")
      ->required();
  eval->add_option("--ref", ref_path, "reference grid file");
  eval->add_option("--out", flags.out_dir, "output directory for CSV");
  eval->add_option("--nx", eval_nx, "evaluation grid x resolution");
  eval->add_option("--nt", eval_nt, "evaluation grid t resolution");

  CLI::App* oracle = app.add_subcommand("oracle", "pseudospectral reference");
  oracle->add_option("--problem", problem, "problem name")->required();
  oracle->add_option("--nx", nx, "spatial modes (default per problem)");
  oracle->add_option("--dt", dt, "time step (default per problem)");
  oracle->add_option("--T", horizon, "horizon")->required();
  oracle->add_option("--frames", frames, "stored time frames");
  oracle->add_option("--out", oracle_out, "output grid file")->required();

  CLI::App* compare =
      app.add_subcommand("compare", "standard vs fixed vs trained transition");
  add_common(compare, true);
  compare->add_option("--ref", ref_path, "reference grid file");
  compare->add_flag("--assert", do_assert, "exit 5 if thresholds fail");
  compare->add_option("--threshold", threshold,
                      "l2_rel bound checked by --assert");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  std::string command;
  for (int i = 0; i < argc; ++i) {
    if (i) command += ' ';
    command += argv[i];
  }

  try {
    thread_cap();  // validate the environment override early
    if (train->parsed()) return cmd_train(flags, ref_path, command);
    if (part->parsed())
      return cmd_partition(problem, t_init, delta, m_points, flags);
    if (eval->parsed())
      return cmd_evaluate(checkpoint_dir, ref_path, flags.out_dir, eval_nx,
                          eval_nt);
    if (oracle->parsed())
      return cmd_oracle(problem, nx, dt, horizon, frames, oracle_out);
    if (compare->parsed())
      return cmd_compare(flags, ref_path, do_assert, threshold, command);
    return kExitConfig;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const no_exact_solution_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const format_error& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitIo;
  } catch (const coverage_error& e) {
    std::cerr << "coverage error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTraining;
  }
}
