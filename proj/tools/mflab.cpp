// mflab: experiment harness for the local-choice ring, its count chain, the
// truncated tuple ODE, and the (k+1)-queue reference model.
//
// Exit codes: 0 success, 1 check/solver failure, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mflab/density.hpp"
#include "mflab/errors.hpp"
#include "mflab/experiment.hpp"
#include "mflab/jsq.hpp"
#include "mflab/meanfield.hpp"
#include "mflab/ring.hpp"
#include "mflab/version.hpp"

namespace {

using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw mflab::ConfigError("cannot open output file: " + path);
  f << body;
}

ordered_json law_to_json(const mflab::ProportionVector& law) {
  ordered_json j = ordered_json::object();
  for (const auto& [u, v] : law.entries()) j[u.label()] = v;
  return j;
}

// "0,1" carries commas, so tuple labels are always quoted in CSV output.
std::string csv_tuple(const mflab::SuperNode& u) { return '"' + u.label() + '"'; }

struct SeedOption {
  CLI::Option* opt = nullptr;
  std::uint64_t* value = nullptr;
};

// flags > config file > MFLAB_SEED. CLI11 already handles the first two, so
// the environment is consulted only when neither supplied a value.
void apply_seed_env(const std::vector<SeedOption>& seeds) {
  const char* env = std::getenv("MFLAB_SEED");
  if (!env) return;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw mflab::ConfigError("MFLAB_SEED is not an unsigned integer: " + std::string(env));
  for (const SeedOption& s : seeds)
    if (s.opt->count() == 0) *s.value = parsed;
}

int run_jsq(int k, double lambda, double mu, int trunc, const std::string& out) {
  const mflab::JsqSolution sol = mflab::jsq_stationary_law(k, lambda, mu, trunc);
  ordered_json j;
  j["version"] = mflab::kVersion;
  j["k"] = k;
  j["lambda"] = lambda;
  j["mu"] = mu;
  j["B"] = trunc;
  j["residual"] = sol.residual;
  j["law"] = law_to_json(sol.law);
  write_text(out, j.dump(2) + "\n");
  return 0;
}

int run_ode(int k, double lambda, double mu, int trunc, double t_max, double dt,
            bool want_fixed_point, bool literal, std::uint64_t, const std::string& out) {
  if (dt <= 0.0) dt = 0.01 / mu;

  if (want_fixed_point) {
    const mflab::FixedPointResult fp = mflab::fixed_point(k, lambda, mu, trunc);
    ordered_json j;
    j["version"] = mflab::kVersion;
    j["k"] = k;
    j["lambda"] = lambda;
    j["mu"] = mu;
    j["B"] = trunc;
    j["residual"] = fp.residual;
    j["boundary_mass"] = fp.boundary_mass;
    j["law"] = law_to_json(fp.state.to_proportion());
    write_text(out, j.dump(2) + "\n");
    return 0;
  }

  mflab::OdeState z0(k, trunc);
  mflab::IntegrationOptions opts;
  opts.sample_interval = t_max / 100.0;
  opts.literal_drift = literal;
  const mflab::Trajectory tr = mflab::integrate(z0, k, lambda, mu, t_max, dt, opts);

  std::ostringstream os;
  os << "# tuple-mass trajectory from the empty state\n";
  os << "# version=" << mflab::kVersion << "\n";
  os << "# k=" << k << " lambda=" << mflab::format_double(lambda)
     << " mu=" << mflab::format_double(mu) << " trunc=" << trunc
     << " t_max=" << mflab::format_double(t_max) << " dt=" << mflab::format_double(dt)
     << " literal=" << (literal ? 1 : 0) << "\n";
  os << "t,u,z\n";
  for (const mflab::OdeState& s : tr.samples) {
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      if (s.z[i] == 0.0) continue;
      os << mflab::format_double(s.t) << ',' << csv_tuple(s.box.decode(i)) << ','
         << mflab::format_double(s.z[i]) << "\n";
    }
  }
  os << "# steps=" << tr.diagnostics.steps
     << " max_mass_drift=" << mflab::format_double(tr.diagnostics.max_mass_drift)
     << " min_entry=" << mflab::format_double(tr.diagnostics.min_entry_seen)
     << " clips=" << tr.diagnostics.clip_count << "\n";
  write_text(out, os.str());
  return 0;
}

int run_ring(int nodes, int k, double lambda, double mu, double horizon, double burn_in,
             long long samples, double gap, std::uint64_t seed, int reps,
             const std::string& out) {
  if (reps < 1) throw mflab::ConfigError("ring: --reps must be >= 1");
  if (burn_in < 0.0) {
    if (!(lambda < mu)) throw mflab::InstabilityError("ring: default burn-in needs lambda < mu");
    burn_in = 10.0 / (mu - lambda);
  }
  if (horizon > 0.0) {
    // Horizon, when given, bounds the sampled window.
    const double window = horizon - burn_in;
    if (window <= 0.0) throw mflab::ConfigError("ring: horizon does not clear the burn-in");
    samples = std::min<long long>(samples, static_cast<long long>(window / gap));
  }

  std::ostringstream os;
  os << "# ring stationary estimate, one block of rows per replication\n";
  os << "# version=" << mflab::kVersion << "\n";
  os << "# nodes=" << nodes << " k=" << k << " lambda=" << mflab::format_double(lambda)
     << " mu=" << mflab::format_double(mu) << " burn_in=" << mflab::format_double(burn_in)
     << " samples=" << samples << " gap=" << mflab::format_double(gap) << " seed=" << seed
     << " reps=" << reps << "\n";
  os << "replication,u,mean,stderr\n";
  for (int rep = 0; rep < reps; ++rep) {
    mflab::RingConfig rc;
    rc.n_nodes = nodes;
    rc.k_neighbors = k;
    rc.lambda = lambda;
    rc.mu = mu;
    rc.seed = mflab::derive_stream_seed(seed, static_cast<std::uint64_t>(rep));
    const mflab::StationaryEstimate est =
        mflab::stationary_estimate(rc, burn_in, samples, gap);
    for (const auto& [u, mean] : est.mean.entries()) {
      const auto se = est.std_errors.find(u);
      os << rep << ',' << csv_tuple(u) << ',' << mflab::format_double(mean) << ','
         << mflab::format_double(se == est.std_errors.end() ? 0.0 : se->second) << "\n";
    }
  }
  write_text(out, os.str());
  return 0;
}

int run_density(int nodes, int k, double lambda, double mu, double horizon,
                std::uint64_t seed, bool exact, int trunc, bool capped, double gap,
                bool literal, const std::string& out) {
  if (exact) {
    const mflab::ExactStationaryResult res =
        mflab::exact_stationary(nodes, k, lambda, mu, trunc);
    ordered_json j;
    j["version"] = mflab::kVersion;
    j["nodes"] = nodes;
    j["k"] = k;
    j["lambda"] = lambda;
    j["mu"] = mu;
    j["B"] = trunc;
    j["boundary_mass"] = res.boundary_mass;
    j["solver_residual"] = res.residual;
    j["mean_proportion"] = law_to_json(res.mean_proportion);
    write_text(out, j.dump(2) + "\n");
    return 0;
  }

  if (horizon <= 0.0) throw mflab::ConfigError("density: --horizon must be > 0");
  mflab::CountVector start;
  start.n = nodes;
  start.counts.emplace(mflab::SuperNode(std::vector<int>(static_cast<std::size_t>(k) + 1, 0)),
                       nodes);

  std::ostringstream os;
  os << "# count-chain snapshots every " << mflab::format_double(gap) << " time units\n";
  os << "# version=" << mflab::kVersion << "\n";
  os << "# nodes=" << nodes << " k=" << k << " lambda=" << mflab::format_double(lambda)
     << " mu=" << mflab::format_double(mu) << " horizon=" << mflab::format_double(horizon)
     << " seed=" << seed << " cap=" << (capped ? std::to_string(trunc) : std::string("none"))
     << " literal=" << (literal ? 1 : 0) << "\n";
  os << "time,u,count\n";

  double next_snap = 0.0;
  mflab::CountVector held = start;
  const auto emit_until = [&](double t) {
    while (next_snap < t && next_snap <= horizon) {
      for (const auto& [u, c] : held.counts)
        if (c > 0)
          os << mflab::format_double(next_snap) << ',' << csv_tuple(u) << ',' << c << "\n";
      next_snap += gap;
    }
  };

  mflab::GillespieOptions gopts;
  if (capped) gopts.cap = trunc;
  gopts.rule = literal ? mflab::ArrivalRule::kLiteral : mflab::ArrivalRule::kStandard;
  const mflab::CountVector final_state = mflab::gillespie_simulate(
      start, k, lambda, mu, horizon, seed,
      [&](double t, const mflab::CountVector& m) {
        emit_until(t);
        held = m;
      },
      gopts);
  emit_until(horizon + gap);  // flush snapshots after the last event
  (void)final_state;
  write_text(out, os.str());
  return 0;
}

int run_converge(const mflab::ExperimentConfig& cfg, const std::string& out) {
  const mflab::ConvergenceReport report = mflab::run_convergence(cfg);
  write_text(out, mflab::convergence_csv(cfg, report));
  return 0;
}

int run_case_suite(const mflab::ExperimentConfig& cfg) {
  const std::vector<mflab::CheckResult> checks = mflab::run_cases(cfg);
  bool all_ok = true;
  for (const mflab::CheckResult& c : checks) {
    all_ok = all_ok && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name
              << " measured=" << mflab::format_double(c.measured)
              << " tolerance=" << mflab::format_double(c.tolerance) << " (" << c.detail
              << ")\n";
  }
  return all_ok ? 0 : 1;
}

int run_drift(const mflab::ExperimentConfig& cfg, const std::string& out) {
  const mflab::DriftReport report = mflab::run_drift_comparison(cfg);
  std::ostringstream os;
  os << "tracked=" << report.tracked.label() << "\n";
  for (const mflab::DriftCell& cell : report.cells)
    os << "n=" << cell.n << " max_gap=" << mflab::format_double(cell.max_gap) << "\n";
  os << "decreasing=" << (report.decreasing ? "yes" : "no") << "\n";
  os << "ring_nodes=" << report.ring_nodes
     << " ring_density_gap=" << mflab::format_double(report.ring_density_gap) << "\n";
  std::cout << os.str();
  if (!out.empty()) {
    ordered_json j;
    j["version"] = mflab::kVersion;
    j["tracked"] = report.tracked.label();
    j["k"] = cfg.k;
    j["lambda"] = cfg.lambda;
    j["mu"] = cfg.mu;
    j["seed"] = cfg.seed;
    ordered_json cells = ordered_json::array();
    for (const mflab::DriftCell& cell : report.cells)
      cells.push_back({{"n", cell.n}, {"max_gap", cell.max_gap}});
    j["cells"] = cells;
    j["decreasing"] = report.decreasing;
    j["ring_nodes"] = report.ring_nodes;
    j["ring_density_gap"] = report.ring_density_gap;
    write_text(out, j.dump(2) + "\n");
  }
  return report.decreasing ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local-choice ring balancing lab"};
  app.set_version_flag("--version", mflab::kVersion);
  app.require_subcommand(1);
  // CLI11 processes config files on the app that owns the flag, so the flag
  // lives here and subcommand values sit in one [subcommand] section each.
  app.set_config("--config", "",
                 "key-value file mirroring the flags, one [subcommand] section per mode");
  std::vector<SeedOption> seed_opts;

  // jsq
  auto* jsq = app.add_subcommand("jsq", "stationary law of the (k+1)-queue reference model");
  jsq->fallthrough();
  int jsq_k = 1;
  double jsq_lambda = 0.7, jsq_mu = 1.0;
  int jsq_trunc = 40;
  std::string jsq_out;
  jsq->add_option("--k", jsq_k, "neighbor count")->check(CLI::NonNegativeNumber);
  jsq->add_option("--lambda", jsq_lambda, "arrival rate per node");
  jsq->add_option("--mu", jsq_mu, "service rate");
  jsq->add_option("--trunc", jsq_trunc, "queue-length cap B")->check(CLI::PositiveNumber);
  jsq->add_option("--out", jsq_out, "output JSON path (default stdout)");

  // ode
  auto* ode = app.add_subcommand("ode", "integrate the truncated tuple-mass system");
  ode->fallthrough();
  int ode_k = 1;
  double ode_lambda = 0.7, ode_mu = 1.0, ode_tmax = 10.0, ode_dt = 0.0;
  int ode_trunc = 40;
  bool ode_fp = false, ode_literal = false;
  std::uint64_t ode_seed = 1;
  std::string ode_out;
  ode->add_option("--k", ode_k)->check(CLI::NonNegativeNumber);
  ode->add_option("--lambda", ode_lambda);
  ode->add_option("--mu", ode_mu);
  ode->add_option("--trunc", ode_trunc)->check(CLI::PositiveNumber);
  ode->add_option("--t-max", ode_tmax);
  ode->add_option("--dt", ode_dt, "step size (default 0.01/mu)");
  ode->add_flag("--fixed-point", ode_fp, "emit the equilibrium law instead of a trajectory");
  ode->add_flag("--remark2-literal", ode_literal, "use the literal printed drift variant");
  seed_opts.push_back({ode->add_option("--seed", ode_seed), &ode_seed});
  ode->add_option("--out", ode_out, "output path (default stdout)");

  // ring
  auto* ring = app.add_subcommand("ring", "simulate the n-node ring and estimate its law");
  ring->fallthrough();
  int ring_nodes = 16, ring_k = 1, ring_reps = 1;
  double ring_lambda = 0.7, ring_mu = 1.0, ring_horizon = 0.0, ring_burn = -1.0, ring_gap = 1.0;
  long long ring_samples = 400;
  std::uint64_t ring_seed = 1;
  std::string ring_out;
  ring->add_option("--nodes", ring_nodes)->check(CLI::PositiveNumber);
  ring->add_option("--k", ring_k)->check(CLI::NonNegativeNumber);
  ring->add_option("--lambda", ring_lambda);
  ring->add_option("--mu", ring_mu);
  ring->add_option("--horizon", ring_horizon, "cap on simulated time (0: from samples)");
  ring->add_option("--burn-in", ring_burn, "warmup time (default 10/(mu-lambda))");
  ring->add_option("--samples", ring_samples)->check(CLI::PositiveNumber);
  ring->add_option("--gap", ring_gap, "time between snapshots");
  seed_opts.push_back({ring->add_option("--seed", ring_seed), &ring_seed});
  ring->add_option("--reps", ring_reps, "independent replications");
  ring->add_option("--out", ring_out, "output CSV path (default stdout)");

  // density
  auto* density = app.add_subcommand("density", "simulate or solve the count chain");
  density->fallthrough();
  int den_nodes = 16, den_k = 1, den_trunc = 40;
  double den_lambda = 0.7, den_mu = 1.0, den_horizon = 0.0, den_gap = 1.0;
  bool den_exact = false, den_literal = false;
  std::uint64_t den_seed = 1;
  std::string den_out;
  density->add_option("--nodes", den_nodes)->check(CLI::PositiveNumber);
  density->add_option("--k", den_k)->check(CLI::NonNegativeNumber);
  density->add_option("--lambda", den_lambda);
  density->add_option("--mu", den_mu);
  density->add_option("--horizon", den_horizon);
  seed_opts.push_back({density->add_option("--seed", den_seed), &den_seed});
  density->add_flag("--exact", den_exact, "solve the capped chain exactly instead of simulating");
  auto* den_trunc_opt = density->add_option("--trunc", den_trunc, "queue-length cap B");
  density->add_option("--gap", den_gap, "time between snapshot rows");
  density->add_flag("--remark2-literal", den_literal, "use the literal printed arrival constant");
  density->add_option("--out", den_out, "output path (default stdout)");

  // converge
  auto* converge = app.add_subcommand("converge", "distance-to-reference study over ring sizes");
  converge->fallthrough();
  mflab::ExperimentConfig conv_cfg;
  std::string conv_out;
  converge->add_option("--n-list", conv_cfg.n_list, "ring sizes")->delimiter(',');
  converge->add_option("--k", conv_cfg.k)->check(CLI::NonNegativeNumber);
  converge->add_option("--lambda", conv_cfg.lambda);
  converge->add_option("--mu", conv_cfg.mu);
  converge->add_option("--reps", conv_cfg.replications);
  seed_opts.push_back({converge->add_option("--seed", conv_cfg.seed), &conv_cfg.seed});
  converge->add_option("--trunc", conv_cfg.trunc)->check(CLI::PositiveNumber);
  converge->add_option("--samples", conv_cfg.samples)->check(CLI::PositiveNumber);
  converge->add_option("--gap", conv_cfg.sample_gap);
  converge->add_option("--burn-in", conv_cfg.burn_in);
  converge->add_option("--out", conv_out, "output CSV path (default stdout)");

  // cases
  auto* cases = app.add_subcommand("cases", "run the oracle case suite");
  cases->fallthrough();
  mflab::ExperimentConfig cases_cfg;
  cases->add_flag("--remark2-literal", cases_cfg.remark2_literal,
                  "run residual checks with the literal drift variant");
  seed_opts.push_back({cases->add_option("--seed", cases_cfg.seed), &cases_cfg.seed});

  // drift
  auto* drift = app.add_subcommand("drift", "count-chain paths vs the deterministic path");
  drift->fallthrough();
  mflab::ExperimentConfig drift_cfg;
  drift_cfg.n_list = {8, 32, 128};
  drift_cfg.replications = 8;
  std::string drift_out;
  drift->add_option("--n-list", drift_cfg.n_list, "count-chain sizes")->delimiter(',');
  drift->add_option("--k", drift_cfg.k)->check(CLI::NonNegativeNumber);
  drift->add_option("--lambda", drift_cfg.lambda);
  drift->add_option("--mu", drift_cfg.mu);
  drift->add_option("--horizon", drift_cfg.horizon);
  drift->add_option("--reps", drift_cfg.replications);
  drift->add_option("--trunc", drift_cfg.trunc)->check(CLI::PositiveNumber);
  seed_opts.push_back({drift->add_option("--seed", drift_cfg.seed), &drift_cfg.seed});
  drift->add_option("--out", drift_out, "optional JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    apply_seed_env(seed_opts);
    if (jsq->parsed()) return run_jsq(jsq_k, jsq_lambda, jsq_mu, jsq_trunc, jsq_out);
    if (ode->parsed())
      return run_ode(ode_k, ode_lambda, ode_mu, ode_trunc, ode_tmax, ode_dt, ode_fp,
                     ode_literal, ode_seed, ode_out);
    if (ring->parsed())
      return run_ring(ring_nodes, ring_k, ring_lambda, ring_mu, ring_horizon, ring_burn,
                      ring_samples, ring_gap, ring_seed, ring_reps, ring_out);
    if (density->parsed())
      return run_density(den_nodes, den_k, den_lambda, den_mu, den_horizon, den_seed,
                         den_exact, den_trunc, den_exact || den_trunc_opt->count() > 0,
                         den_gap, den_literal, den_out);
    if (converge->parsed()) return run_converge(conv_cfg, conv_out);
    if (cases->parsed()) return run_case_suite(cases_cfg);
    if (drift->parsed()) return run_drift(drift_cfg, drift_out);
  } catch (const mflab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mflab::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mflab::InstabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
