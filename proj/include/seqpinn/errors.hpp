#pragma once

#include <stdexcept>
#include <string>

namespace seqpinn {

// Error taxonomy. The CLI maps these onto process exit codes:
//   2 = configuration, 3 = training/numerics, 4 = I/O and file formats.

/// Bad configuration: dimension mismatches, invalid ranges, unknown keys.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite values encountered where finite arithmetic was required.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A primitive outside the differentiation engine's supported set.
struct unsupported_operation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Corrupt or incompatible on-disk artifacts (grids, checkpoints).
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Spectral solve produced a non-finite field.
struct instability_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Optimizer could not make progress (e.g. line search failed at the start).
struct optimizer_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training of one interval failed; carries the interval index.
struct training_error : std::runtime_error {
  int interval_index;
  training_error(int k, const std::string& what)
      : std::runtime_error(what), interval_index(k) {}
};

/// Posterior-discrepancy denominator vanished.
struct degenerate_solution_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Adaptive partitioning failed; carries the candidate length being tested.
struct partition_error : std::runtime_error {
  double failing_length;
  partition_error(double t, const std::string& what)
      : std::runtime_error(what), failing_length(t) {}
};

/// Requested problem has no closed-form solution.
struct no_exact_solution_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reference data does not cover the requested evaluation region.
struct coverage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace seqpinn
