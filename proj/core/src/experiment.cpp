#include "mflab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "mflab/box.hpp"
#include "mflab/density.hpp"
#include "mflab/errors.hpp"
#include "mflab/jsq.hpp"
#include "mflab/meanfield.hpp"
#include "mflab/ring.hpp"
#include "mflab/rng.hpp"
#include "mflab/version.hpp"

namespace mflab {

double ExperimentConfig::effective_burn_in() const {
  if (burn_in >= 0.0) return burn_in;
  if (!(lambda < mu)) throw InstabilityError("burn-in default needs lambda < mu");
  return 10.0 / (mu - lambda);
}

void parallel_for_index(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min(hw, jobs);
  if (n_threads <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) fn(j);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        fn(j);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

// Tuple at which the sup in rho_distance is attained (first in map order on
// exact ties). Needed to attach a standard error to the reported distance.
SuperNode rho_binding_tuple(const ProportionVector& a, const ProportionVector& b) {
  SuperNode best;
  double sup = -1.0;
  auto visit = [&](const SuperNode& u, double va, double vb) {
    const double d = std::abs(va - vb) / static_cast<double>(u.q.back() + 1);
    if (d > sup) {
      sup = d;
      best = u;
    }
  };
  for (const auto& [u, v] : a.entries()) visit(u, v, b.at(u));
  for (const auto& [u, v] : b.entries())
    if (!a.entries().count(u)) visit(u, 0.0, v);
  return best;
}

// Time-averaged stationary estimate for the supernode count chain with n
// members, sampled on a fixed grid (sample-and-hold between jumps). Mirrors
// the ring estimator's batch-means layout so downstream handling is shared.
StationaryEstimate averaged_chain_law(int n, int k, double lambda, double mu, double burn,
                                      long long n_samples, double gap, std::uint64_t seed) {
  constexpr int kBatches = 20;
  if (n_samples < kBatches)
    throw ConfigError("averaged_chain_law: need at least 20 samples for batch means");

  CountVector start;
  start.n = n;
  start.counts.emplace(SuperNode{std::vector<int>(static_cast<std::size_t>(k) + 1, 0)},
                       static_cast<long long>(n));

  const long long per_batch = n_samples / kBatches;
  std::map<SuperNode, long long> total;
  std::vector<std::map<SuperNode, long long>> batch(kBatches);
  std::vector<long long> batch_size(kBatches, 0);

  long long next = 0;
  CountVector held = start;
  const auto flush_until = [&](double t) {
    while (next < n_samples && burn + static_cast<double>(next + 1) * gap < t) {
      const int b = static_cast<int>(std::min<long long>(next / per_batch, kBatches - 1));
      ++batch_size[static_cast<std::size_t>(b)];
      auto& bm = batch[static_cast<std::size_t>(b)];
      for (const auto& [u, c] : held.counts) {
        if (c == 0) continue;
        total[u] += c;
        bm[u] += c;
      }
      ++next;
    }
  };

  const double horizon = burn + static_cast<double>(n_samples) * gap;
  gillespie_simulate(start, k, lambda, mu, horizon, seed,
                     [&](double t, const CountVector& m) {
                       flush_until(t);
                       held = m;
                     });
  flush_until(horizon + gap);  // grid points past the final jump

  const double denom = static_cast<double>(n) * static_cast<double>(n_samples);
  ProportionVector::Map entries;
  double partial = 0.0;
  std::size_t seen = 0;
  for (const auto& [u, c] : total) {
    ++seen;
    if (seen == total.size()) {
      entries.emplace(u, 1.0 - partial);
    } else {
      const double v = static_cast<double>(c) / denom;
      partial += v;
      entries.emplace(u, v);
    }
  }

  StationaryEstimate out;
  out.mean = ProportionVector(k, std::move(entries));
  out.n_samples = n_samples;
  out.n_batches = kBatches;
  for (const auto& [u, c] : total) {
    (void)c;
    double mean_of_means = 0.0;
    std::vector<double> bm(kBatches);
    for (int b = 0; b < kBatches; ++b) {
      const auto& m = batch[static_cast<std::size_t>(b)];
      const auto it = m.find(u);
      const double cnt = it == m.end() ? 0.0 : static_cast<double>(it->second);
      bm[static_cast<std::size_t>(b)] =
          cnt / (static_cast<double>(n) *
                 static_cast<double>(batch_size[static_cast<std::size_t>(b)]));
      mean_of_means += bm[static_cast<std::size_t>(b)];
    }
    mean_of_means /= kBatches;
    double var = 0.0;
    for (int b = 0; b < kBatches; ++b) {
      const double d = bm[static_cast<std::size_t>(b)] - mean_of_means;
      var += d * d;
    }
    var /= (kBatches - 1);
    out.std_errors[u] = std::sqrt(var / kBatches);
  }
  return out;
}

}  // namespace

ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
  if (!(cfg.lambda < cfg.mu)) throw InstabilityError("run_convergence: requires lambda < mu");
  if (cfg.k < 0) throw ConfigError("run_convergence: k must be >= 0");
  if (cfg.replications < 1) throw ConfigError("run_convergence: replications must be >= 1");
  if (cfg.n_list.empty()) throw ConfigError("run_convergence: n_list is empty");
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    const int n = cfg.n_list[i];
    if (n < cfg.k + 1) throw ConfigError("run_convergence: n must be >= k+1");
    if (n > 1000000) throw ConfigError("run_convergence: n above 1e6");
    if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1])
      throw ConfigError("run_convergence: n_list must be strictly increasing");
  }

  const ProportionVector reference = jsq_stationary_law(cfg.k, cfg.lambda, cfg.mu, cfg.trunc).law;
  const double burn = cfg.effective_burn_in();
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t jobs = cfg.n_list.size() * reps;

  ConvergenceReport report;
  report.rows.resize(jobs);
  parallel_for_index(jobs, [&](std::size_t cell) {
    const int n = cfg.n_list[cell / reps];
    const int rep = static_cast<int>(cell % reps);

    const auto t0 = std::chrono::steady_clock::now();
    const StationaryEstimate est =
        averaged_chain_law(n, cfg.k, cfg.lambda, cfg.mu, burn, cfg.samples, cfg.sample_gap,
                           derive_stream_seed(cfg.seed, cell));
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

    ConvergenceRow row;
    row.n = n;
    row.replication = rep;
    row.rho_to_p = rho_distance(est.mean, reference);
    row.tv_to_p = total_variation(est.mean, reference);
    const SuperNode binding = rho_binding_tuple(est.mean, reference);
    const auto se = est.std_errors.find(binding);
    row.stderr_at_binding = se == est.std_errors.end() ? 0.0 : se->second;
    row.wall_time_s = dt.count();
    report.rows[cell] = row;
  });

  for (std::size_t b = 0; b < cfg.n_list.size(); ++b) {
    ConvergenceCell cell;
    cell.n = cfg.n_list[b];
    double sum = 0.0, sum_tv = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      sum += report.rows[b * reps + r].rho_to_p;
      sum_tv += report.rows[b * reps + r].tv_to_p;
    }
    cell.mean_rho = sum / static_cast<double>(reps);
    cell.mean_tv = sum_tv / static_cast<double>(reps);
    double var = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double d = report.rows[b * reps + r].rho_to_p - cell.mean_rho;
      var += d * d;
    }
    if (reps > 1) {
      var /= static_cast<double>(reps - 1);
      cell.ci_half = 1.96 * std::sqrt(var / static_cast<double>(reps));
    }
    report.cells.push_back(cell);
  }

  report.non_increasing_within_ci = true;
  for (std::size_t b = 1; b < report.cells.size(); ++b) {
    const auto& prev = report.cells[b - 1];
    const auto& cur = report.cells[b];
    if (cur.mean_rho > prev.mean_rho + prev.ci_half + cur.ci_half)
      report.non_increasing_within_ci = false;
  }
  if (!report.cells.empty() && report.cells.back().mean_rho > 0.0)
    report.shrink_factor = report.cells.front().mean_rho / report.cells.back().mean_rho;
  return report;
}

std::vector<Transition> k1_case_table(const CountVector& m, double lambda, double mu,
                                      std::optional<int> cap) {
  m.validate();
  if (m.arity() != 2) throw DimensionError("k1_case_table: pair tuples required");
  std::vector<Transition> out;
  for (const auto& [u, c] : m.counts) {
    if (c == 0) continue;
    const int i = u[0], j = u[1];
    const double zc = static_cast<double>(c);
    const bool i_free = !cap || i < *cap;
    const bool j_free = !cap || j < *cap;
    if (i < j && lambda > 0.0 && i_free) out.push_back({u, u.shifted(0, +1), 2.0 * lambda * zc});
    if (i == j && lambda > 0.0 && i_free) out.push_back({u, u.shifted(0, +1), lambda * zc});
    if (i > j && lambda > 0.0 && j_free) out.push_back({u, u.shifted(1, +1), 2.0 * lambda * zc});
    if (i == j && lambda > 0.0 && j_free) out.push_back({u, u.shifted(1, +1), lambda * zc});
    if (i > 0 && mu > 0.0) out.push_back({u, u.shifted(0, -1), mu * zc});
    if (j > 0 && mu > 0.0) out.push_back({u, u.shifted(1, -1), mu * zc});
  }
  return out;
}

namespace {

using TransitionKey = std::tuple<SuperNode, SuperNode, double>;

std::vector<TransitionKey> sorted_triples(const std::vector<Transition>& ts) {
  std::vector<TransitionKey> keys;
  keys.reserve(ts.size());
  for (const auto& t : ts) keys.emplace_back(t.remove, t.add, t.rate);
  std::sort(keys.begin(), keys.end());
  return keys;
}

// All occupancy states of n supernodes over the capped pair grid.
std::vector<CountVector> all_pair_states(long long n, int cap) {
  const TupleBox box(2, cap);
  std::vector<CountVector> states;
  std::vector<int> ids;
  const std::function<void(int, int)> rec = [&](int slots, int first) {
    if (slots == 0) {
      CountVector m;
      m.n = n;
      for (int id : ids) ++m.counts[box.decode(static_cast<std::size_t>(id))];
      states.push_back(std::move(m));
      return;
    }
    for (int v = first; v < static_cast<int>(box.size()); ++v) {
      ids.push_back(v);
      rec(slots - 1, v);
      ids.pop_back();
    }
  };
  rec(static_cast<int>(n), 0);
  return states;
}

CheckResult check_rate_table() {
  CheckResult r{"rate-table-k1", false, 0.0, 0.0,
                "pair-chain jump triples vs explicit case table, n=3 cap=3"};
  const double lambda = 0.7, mu = 1.3;
  long long mismatches = 0;
  for (const CountVector& m : all_pair_states(3, 3)) {
    const auto got = sorted_triples(enabled_transitions(m, 1, lambda, mu, 3));
    const auto want = sorted_triples(k1_case_table(m, lambda, mu, 3));
    if (got != want) ++mismatches;
  }
  r.measured = static_cast<double>(mismatches);
  r.passed = mismatches == 0;
  return r;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

CheckResult check_residual_k1(bool literal) {
  CheckResult r{"stationary-residual-k1", false, 0.0, 1e-8,
                "max |drift| at the k=1 reference law, lambda=0.7 mu=1 cap=60"};
  const JsqSolution sol = jsq_stationary_law(1, 0.7, 1.0, 60);
  const OdeState state = OdeState::from_proportion(sol.law, 60);
  const std::vector<double> d =
      literal ? rhs_literal(state, 1, 0.7, 1.0) : rhs_k1(state, 0.7, 1.0);
  r.measured = max_abs(d);
  r.passed = r.measured <= r.tolerance;
  if (literal) r.detail += " [literal drift variant]";
  return r;
}

CheckResult check_residual_k2(bool literal) {
  CheckResult r{"stationary-residual-k2", false, 0.0, 1e-8,
                "max |drift| at the k=2 reference law, lambda=0.7 mu=1 cap=25"};
  const JsqSolution sol = jsq_stationary_law(2, 0.7, 1.0, 25);
  const OdeState state = OdeState::from_proportion(sol.law, 25);
  const std::vector<double> d =
      literal ? rhs_literal(state, 2, 0.7, 1.0) : rhs_general(state, 2, 0.7, 1.0);
  r.measured = max_abs(d);
  r.passed = r.measured <= r.tolerance;
  if (literal) r.detail += " [literal drift variant]";
  return r;
}

CheckResult check_geometric() {
  CheckResult r{"geometric-k0", false, 0.0, 1e-8,
                "k=0 equilibrium and reference law vs (1-rho)rho^n, rho=0.5, n<=40"};
  const double lambda = 0.5, mu = 1.0;
  const int cap = 60;
  const FixedPointResult fp = fixed_point(0, lambda, mu, cap);
  const JsqSolution sol = jsq_stationary_law(0, lambda, mu, cap);
  double worst = 0.0;
  for (int n = 0; n <= 40; ++n) {
    const double geo = mm1_analytic(lambda, mu, n);
    const SuperNode u{n};
    worst = std::max(worst, std::abs(fp.state.z[fp.state.box.index(u)] - geo));
    worst = std::max(worst, std::abs(sol.law.at(u) - geo));
  }
  r.measured = worst;
  r.passed = worst <= r.tolerance;
  return r;
}

CheckResult check_pair_coincidence() {
  CheckResult r{"two-node-coincidence", false, 0.0, 1e-8,
                "exact 2-node ring law vs 2-queue reference law, lambda=0.3 mu=1 cap=40"};
  const RingExactSolution ring = ring_exact_law(2, 1, 0.3, 1.0, 40);
  const JsqSolution jsq = jsq_stationary_law(1, 0.3, 1.0, 40);
  r.measured = max_abs_difference(ring.law, jsq.law);
  r.passed = r.measured <= r.tolerance;
  return r;
}

// Random point on the simplex over the given box, with a fixed fraction of
// structurally zero entries to exercise sparse corners.
OdeState random_state(const TupleBox& box, SplitRng& rng) {
  std::vector<double> z(box.size(), 0.0);
  double total = 0.0;
  for (double& v : z) {
    if (rng.uniform01() < 0.3) continue;
    v = rng.uniform01();
    total += v;
  }
  if (total == 0.0) {
    z[0] = 1.0;
  } else {
    for (double& v : z) v /= total;
  }
  return OdeState(box, std::move(z));
}

CheckResult check_specialization(std::uint64_t seed) {
  CheckResult r{"drift-specialization", false, 0.0, 0.0,
                "general-k drift vs pair form (bitwise) and vs single-queue form"};
  SplitRng rng = SplitRng::stream(seed, 77);
  double worst = 0.0;

  const TupleBox pair_box(2, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const OdeState s = random_state(pair_box, rng);
    const std::vector<double> a = rhs_k1(s, 0.7, 1.0);
    const std::vector<double> b = rhs_general(s, 1, 0.7, 1.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(a[i] - b[i]));
  }

  // Single-queue reduction: birth-death forward equations, written in the
  // same inflow-minus-outflow shape.
  const TupleBox line_box(1, 12);
  const double lambda = 0.6, mu = 1.1;
  for (int trial = 0; trial < 50; ++trial) {
    const OdeState s = random_state(line_box, rng);
    const std::vector<double> got = rhs_general(s, 0, lambda, mu);
    for (int i = 0; i <= line_box.cap(); ++i) {
      const double zi = s.z[static_cast<std::size_t>(i)];
      double arr_in = 0.0;
      if (i >= 1) arr_in += s.z[static_cast<std::size_t>(i - 1)] * 1.0;
      const double out_frac = i < line_box.cap() ? 1.0 : 0.0;
      double svc = 0.0;
      if (i < line_box.cap()) svc += s.z[static_cast<std::size_t>(i + 1)];
      if (i > 0) svc -= zi;
      const double want = 1.0 * lambda * (arr_in - zi * out_frac) + mu * svc;
      worst = std::max(worst, std::abs(got[static_cast<std::size_t>(i)] - want));
    }
  }
  r.measured = worst;
  r.passed = worst == 0.0;
  return r;
}

}  // namespace

std::vector<CheckResult> run_cases(const ExperimentConfig& cfg) {
  std::vector<CheckResult> out;
  out.push_back(check_rate_table());
  out.push_back(check_geometric());
  out.push_back(check_pair_coincidence());
  out.push_back(check_residual_k1(cfg.remark2_literal));
  out.push_back(check_residual_k2(cfg.remark2_literal));
  out.push_back(check_specialization(cfg.seed));
  return out;
}

namespace {

// Sample-and-hold reader: turns event callbacks into values on a fixed grid.
class GridRecorder {
 public:
  GridRecorder(double step, int points, double initial)
      : step_(step), values_(static_cast<std::size_t>(points) + 1, initial) {}

  // Grid point g takes the last observed value with t <= g*step (up to a
  // 1e-9 snap so integrator samples landing just past a grid time count).
  void observe(double t, double value) {
    while (next_ < values_.size() && static_cast<double>(next_) * step_ < t - 1e-9) ++next_;
    for (std::size_t g = next_; g < values_.size(); ++g) values_[g] = value;
  }

  const std::vector<double>& values() const { return values_; }

 private:
  double step_ = 0.0;
  std::size_t next_ = 1;  // grid point 0 keeps the initial value
  std::vector<double> values_;
};

}  // namespace

DriftReport run_drift_comparison(const ExperimentConfig& cfg) {
  if (!(cfg.lambda < cfg.mu)) throw InstabilityError("run_drift_comparison: requires lambda < mu");
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 10.0;
  const double grid_step = 0.1;
  const int points = static_cast<int>(std::llround(horizon / grid_step));
  const std::vector<int> n_grid = cfg.n_list.empty() ? std::vector<int>{8, 32, 128} : cfg.n_list;
  for (int n : n_grid)
    if (n < cfg.k + 1 || n > 1024)
      throw ConfigError("run_drift_comparison: n must lie in [k+1, 1024]");
  const int reps = std::max(1, cfg.replications);

  DriftReport report;
  report.tracked = SuperNode(std::vector<int>(static_cast<std::size_t>(cfg.k) + 1, 0));

  // Deterministic path from the empty state, sampled on the grid.
  const OdeState z0(cfg.k, cfg.trunc);
  IntegrationOptions opts;
  opts.sample_interval = grid_step;
  const Trajectory tr = integrate(z0, cfg.k, cfg.lambda, cfg.mu, horizon, 0.01 / cfg.mu, opts);
  std::vector<double> ode_path(static_cast<std::size_t>(points) + 1, 0.0);
  {
    const std::size_t zero_idx = 0;  // all-zeros tuple is index 0
    GridRecorder rec(grid_step, points, tr.samples.front().z[zero_idx]);
    for (const OdeState& s : tr.samples) rec.observe(s.t, s.z[zero_idx]);
    ode_path = rec.values();
  }

  const auto density_curve = [&](int n, std::uint64_t stream) {
    CountVector start;
    start.n = n;
    start.counts.emplace(report.tracked, n);
    GridRecorder rec(grid_step, points, 1.0);
    GillespieOptions gopts;
    gopts.cap = cfg.trunc;
    gillespie_simulate(start, cfg.k, cfg.lambda, cfg.mu, horizon,
                       derive_stream_seed(cfg.seed, stream),
                       [&](double t, const CountVector& m) {
                         const auto it = m.counts.find(report.tracked);
                         const double v =
                             it == m.counts.end()
                                 ? 0.0
                                 : static_cast<double>(it->second) / static_cast<double>(n);
                         rec.observe(t, v);
                       },
                       gopts);
    return rec.values();
  };

  std::vector<std::vector<double>> density_mean;  // per n_grid entry
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const int n = n_grid[ni];
    double gap_sum = 0.0;
    std::vector<double> mean(static_cast<std::size_t>(points) + 1, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
      const std::vector<double> path =
          density_curve(n, 1000 + ni * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep));
      double gap = 0.0;
      for (std::size_t g = 0; g < path.size(); ++g) {
        gap = std::max(gap, std::abs(path[g] - ode_path[g]));
        mean[g] += path[g] / static_cast<double>(reps);
      }
      gap_sum += gap;
    }
    report.cells.push_back({n, gap_sum / static_cast<double>(reps)});
    density_mean.push_back(std::move(mean));
  }

  report.decreasing = true;
  for (std::size_t i = 1; i < report.cells.size(); ++i)
    if (report.cells[i].max_gap >= report.cells[i - 1].max_gap) report.decreasing = false;

  // Ring vs count chain at the largest n, same grid, mean curves.
  report.ring_nodes = n_grid.back();
  {
    const int n = report.ring_nodes;
    std::vector<double> ring_mean(static_cast<std::size_t>(points) + 1, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
      RingConfig rc;
      rc.n_nodes = n;
      rc.k_neighbors = cfg.k;
      rc.lambda = cfg.lambda;
      rc.mu = cfg.mu;
      rc.seed = derive_stream_seed(cfg.seed, 500000 + static_cast<std::uint64_t>(rep));
      rc.horizon = horizon;
      GridRecorder rec(grid_step, points, 1.0);
      simulate(rc, [&](double t, const NetworkState& st) {
        rec.observe(t, empirical_proportion(st, cfg.k).at(report.tracked));
      });
      for (std::size_t g = 0; g < rec.values().size(); ++g)
        ring_mean[g] += rec.values()[g] / static_cast<double>(reps);
    }
    double gap = 0.0;
    for (std::size_t g = 0; g < ring_mean.size(); ++g)
      gap = std::max(gap, std::abs(ring_mean[g] - density_mean.back()[g]));
    report.ring_density_gap = gap;
  }
  return report;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string convergence_csv(const ExperimentConfig& cfg, const ConvergenceReport& report) {
  std::ostringstream os;
  os << "# convergence study: time-averaged supernode proportions vs reference law\n";
  os << "# version=" << kVersion << "\n";
  os << "# k=" << cfg.k << " lambda=" << format_double(cfg.lambda)
     << " mu=" << format_double(cfg.mu) << " trunc=" << cfg.trunc << "\n";
  os << "# n_list=";
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i)
    os << (i ? "," : "") << cfg.n_list[i];
  os << " replications=" << cfg.replications << " seed=" << cfg.seed << "\n";
  os << "# burn_in=" << format_double(cfg.effective_burn_in())
     << " samples=" << cfg.samples << " sample_gap=" << format_double(cfg.sample_gap) << "\n";
  os << "n,replication,rho_to_P,tv_to_P,stderr,wall_time_s\n";
  for (const ConvergenceRow& row : report.rows) {
    os << row.n << ',' << row.replication << ',' << format_double(row.rho_to_p) << ','
       << format_double(row.tv_to_p) << ',' << format_double(row.stderr_at_binding) << ','
       << format_double(row.wall_time_s) << "\n";
  }
  for (const ConvergenceCell& cell : report.cells) {
    os << "# summary n=" << cell.n << " mean_rho=" << format_double(cell.mean_rho)
       << " ci_half=" << format_double(cell.ci_half)
       << " mean_tv=" << format_double(cell.mean_tv) << "\n";
  }
  os << "# non_increasing_within_ci=" << (report.non_increasing_within_ci ? 1 : 0)
     << " shrink_factor=" << format_double(report.shrink_factor) << "\n";
  return os.str();
}

}  // namespace mflab
