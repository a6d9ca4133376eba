#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mflab/density.hpp"
#include "mflab/proportion.hpp"

namespace mflab {

/// Shared knob set for the study harness. Each mode validates the fields it
/// actually uses.
struct ExperimentConfig {
  int k = 1;
  double lambda = 0.7;
  double mu = 1.0;
  std::vector<int> n_list{4, 16, 64, 256};
  double horizon = 0.0;   // 0: mode-specific default
  double burn_in = -1.0;  // < 0: default 10/(mu - lambda)
  long long samples = 400;
  double sample_gap = 1.0;
  int trunc = 40;
  int replications = 20;
  std::uint64_t seed = 1;
  bool remark2_literal = false;

  double effective_burn_in() const;
};

struct ConvergenceRow {
  int n = 0;
  int replication = 0;
  double rho_to_p = 0.0;
  double tv_to_p = 0.0;
  double stderr_at_binding = 0.0;  // batch-means SE at the tuple where rho binds
  double wall_time_s = 0.0;
};

struct ConvergenceCell {
  int n = 0;
  double mean_rho = 0.0;
  double ci_half = 0.0;  // 95% half-width over replications
  double mean_tv = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // cell-major: n_list order, then replication
  std::vector<ConvergenceCell> cells;
  bool non_increasing_within_ci = false;
  double shrink_factor = 0.0;  // first-cell mean over last-cell mean
};

/// Distance-to-reference study over the ring sizes in n_list: each (n,
/// replication) cell runs an independent ring estimate and reports its
/// rho/TV distance to the truncated reference law. Cells fan out over a
/// worker pool; rows are folded in fixed cell order, so output is
/// deterministic for a given (config, seed).
ConvergenceReport run_convergence(const ExperimentConfig& cfg);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Oracle case suite with pinned canonical parameters. cfg contributes only
/// the seed and the remark2_literal switch (which makes the residual checks
/// run the literal drift variant, expected to fail for k >= 1).
std::vector<CheckResult> run_cases(const ExperimentConfig& cfg);

struct DriftCell {
  int n = 0;
  double max_gap = 0.0;  // mean over replications of max |sim - ode| on the grid
};

struct DriftReport {
  SuperNode tracked;  // coordinate followed on the time grid (all-zeros tuple)
  std::vector<DriftCell> cells;
  bool decreasing = false;
  int ring_nodes = 0;
  double ring_density_gap = 0.0;  // diagnostic only, no threshold
};

/// Sample-path comparison: count-chain trajectories at several n against the
/// deterministic path from the same start, plus a ring-vs-count-chain gap at
/// the largest n.
DriftReport run_drift_comparison(const ExperimentConfig& cfg);

/// Pair-tuple jump rates written out as the explicit case table: the whole
/// stream (2*lambda per supernode) to the strictly smaller coordinate, an
/// even split on ties, one service stream per busy coordinate. Independent
/// transcription kept solely to cross-check the general-k path.
std::vector<Transition> k1_case_table(const CountVector& m, double lambda, double mu,
                                      std::optional<int> cap = std::nullopt);

/// Shortest decimal that round-trips to the same double; shared by all
/// report writers so repeat runs are byte-identical.
std::string format_double(double v);

/// Report body: '#' metadata lines, the fixed header
/// n,replication,rho_to_P,tv_to_P,stderr,wall_time_s, one line per row, and
/// '#' summary lines. Everything except wall_time_s is reproducible.
std::string convergence_csv(const ExperimentConfig& cfg, const ConvergenceReport& report);

/// Run a function over [0, jobs) on a small worker pool (single-threaded when
/// hardware offers one core). The first exception, if any, is rethrown after
/// all workers drain.
void parallel_for_index(std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace mflab
