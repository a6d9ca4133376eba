#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mflab/errors.hpp"
#include "mflab/experiment.hpp"
#include "mflab/rng.hpp"
#include "test_util.hpp"

using namespace mflab;

namespace {

// strip the wall-clock column (last field) from every data line
std::string mask_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && line.find(',') != std::string::npos &&
        line != "n,replication,rho_to_P,tv_to_P,stderr,wall_time_s") {
      const std::size_t cut = line.rfind(',');
      line.resize(cut);
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("case table matches the general transition builder on random states") {
  SplitRng rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const CountVector m = testutil::random_count_vector(rng, 6, 1, 4);
    auto general = enabled_transitions(m, 1, 0.7, 1.3, 4);
    auto table = k1_case_table(m, 0.7, 1.3, 4);
    auto key = [](const Transition& t) { return std::tuple(t.remove, t.add, t.rate); };
    auto lt = [&](const Transition& a, const Transition& b) { return key(a) < key(b); };
    std::sort(general.begin(), general.end(), lt);
    std::sort(table.begin(), table.end(), lt);
    REQUIRE(general.size() == table.size());
    for (std::size_t i = 0; i < general.size(); ++i) CHECK(key(general[i]) == key(table[i]));
  }
}

TEST_CASE("oracle suite passes on defaults") {
  ExperimentConfig cfg;
  const std::vector<CheckResult> checks = run_cases(cfg);
  REQUIRE(checks.size() == 6);
  for (const CheckResult& c : checks) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("literal variant fails exactly the residual checks") {
  ExperimentConfig cfg;
  cfg.remark2_literal = true;
  const std::vector<CheckResult> checks = run_cases(cfg);
  int failed = 0;
  for (const CheckResult& c : checks) {
    if (!c.passed) {
      ++failed;
      CHECK(c.name.find("stationary-residual") != std::string::npos);
      CHECK(c.measured > 0.01);  // the printed form misses the fixed point by a wide margin
    }
  }
  CHECK(failed == 2);
}

TEST_CASE("convergence validation") {
  ExperimentConfig cfg;
  cfg.n_list = {4, 4};
  CHECK_THROWS_AS(run_convergence(cfg), ConfigError);
  cfg.n_list = {};
  CHECK_THROWS_AS(run_convergence(cfg), ConfigError);
  cfg.n_list = {1};  // below k+1
  CHECK_THROWS_AS(run_convergence(cfg), ConfigError);
  cfg.n_list = {4};
  cfg.lambda = 1.1;
  CHECK_THROWS_AS(run_convergence(cfg), InstabilityError);
}

TEST_CASE("convergence report shape and determinism") {
  ExperimentConfig cfg;
  cfg.n_list = {2, 8};
  cfg.replications = 3;
  cfg.samples = 60;
  cfg.seed = 97;
  const ConvergenceReport a = run_convergence(cfg);
  REQUIRE(a.rows.size() == 6);
  REQUIRE(a.cells.size() == 2);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].n == cfg.n_list[i / 3]);
    CHECK(a.rows[i].replication == static_cast<int>(i % 3));
    CHECK(a.rows[i].rho_to_p >= 0.0);
    CHECK(a.rows[i].tv_to_p >= 0.0);
  }
  double mean0 = 0.0;
  for (int r = 0; r < 3; ++r) mean0 += a.rows[static_cast<std::size_t>(r)].rho_to_p;
  CHECK(a.cells[0].mean_rho == doctest::Approx(mean0 / 3).epsilon(1e-15));

  const ConvergenceReport b = run_convergence(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].rho_to_p == b.rows[i].rho_to_p);
    CHECK(a.rows[i].tv_to_p == b.rows[i].tv_to_p);
    CHECK(a.rows[i].stderr_at_binding == b.rows[i].stderr_at_binding);
  }
  CHECK(mask_wall_time(convergence_csv(cfg, a)) == mask_wall_time(convergence_csv(cfg, b)));
}

TEST_CASE("no size effect when members are isolated queues") {
  ExperimentConfig cfg;
  cfg.k = 0;
  cfg.lambda = 0.5;
  cfg.n_list = {4, 16};
  cfg.replications = 4;
  cfg.samples = 200;
  cfg.seed = 12;
  const ConvergenceReport rep = run_convergence(cfg);
  for (const ConvergenceCell& cell : rep.cells) CHECK(cell.mean_rho <= 0.1);
}

TEST_CASE("smallest member count sits at the noise floor") {
  ExperimentConfig cfg;
  cfg.n_list = {2};
  cfg.replications = 8;
  cfg.samples = 400;
  cfg.seed = 5;
  const ConvergenceReport rep = run_convergence(cfg);
  double mean_se = 0.0;
  for (const ConvergenceRow& row : rep.rows) mean_se += row.stderr_at_binding;
  mean_se /= static_cast<double>(rep.rows.size());
  CHECK(rep.cells[0].mean_rho <= 2.0 * mean_se);
}

TEST_CASE("csv header is pinned and rows carry config metadata") {
  ExperimentConfig cfg;
  cfg.n_list = {2};
  cfg.replications = 2;
  cfg.samples = 40;
  const std::string csv = convergence_csv(cfg, run_convergence(cfg));
  CHECK(csv.find("n,replication,rho_to_P,tv_to_P,stderr,wall_time_s\n") != std::string::npos);
  CHECK(csv.find("# n_list=2 replications=2 seed=1") != std::string::npos);
  CHECK(csv.find("# non_increasing_within_ci=") != std::string::npos);
}

TEST_CASE("format_double round-trips") {
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, 0.0, 123456.789, 6.283515739903567e-10}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("drift study: frozen system shows zero gap") {
  ExperimentConfig cfg;
  cfg.lambda = 0.0;
  cfg.mu = 1.0;
  cfg.n_list = {8, 16};
  cfg.replications = 2;
  cfg.horizon = 5.0;
  const DriftReport rep = run_drift_comparison(cfg);
  for (const DriftCell& cell : rep.cells) CHECK(cell.max_gap == 0.0);
  CHECK(rep.ring_density_gap == 0.0);
}

TEST_CASE("drift study runs and reports cells in order") {
  ExperimentConfig cfg;
  cfg.n_list = {8, 32};
  cfg.replications = 3;
  cfg.horizon = 5.0;
  cfg.seed = 21;
  const DriftReport rep = run_drift_comparison(cfg);
  REQUIRE(rep.cells.size() == 2);
  CHECK(rep.cells[0].n == 8);
  CHECK(rep.cells[1].n == 32);
  for (const DriftCell& cell : rep.cells) CHECK(cell.max_gap > 0.0);
  CHECK(rep.ring_nodes == 32);
  CHECK(rep.tracked == SuperNode{0, 0});
}

TEST_CASE("parallel fold visits every job once and surfaces exceptions") {
  std::vector<std::atomic<int>> hits(64);
  parallel_for_index(64, [&](std::size_t j) { ++hits[j]; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(
      parallel_for_index(8, [](std::size_t j) {
        if (j == 5) throw ConfigError("boom");
      }),
      ConfigError);
}
