#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "mflab/ctmc.hpp"
#include "mflab/proportion.hpp"
#include "mflab/rng.hpp"

namespace mflab {

struct RingConfig {
  int n_nodes = 1;
  int k_neighbors = 0;  // 0 <= k <= n_nodes - 1
  double lambda = 0.0;  // arrival rate per node
  double mu = 1.0;      // service rate per server
  std::uint64_t seed = 1;
  double horizon = 0.0;
};

struct NetworkState {
  std::vector<int> queues;  // jobs in system per node, including in service
  double clock = 0.0;
};

/// Ring neighbors of node i: (i+1, ..., i+k) mod n, in that order.
std::vector<int> neighbors(int i, int n, int k);

/// Destination of an arrival entering at node i: the shortest queue among
/// {i} and its k neighbors, ties resolved uniformly at random.
int route_arrival(const NetworkState& state, int i, int k, SplitRng& rng);

/// Tuple (q_i, q_{i+1 mod n}, ..., q_{i+k mod n}).
SuperNode supernode_view(const NetworkState& state, int i, int k);

/// Fraction of nodes observing each tuple. The final map entry absorbs the
/// floating-point summation residue, so the result sums to exactly 1.
ProportionVector empirical_proportion(const NetworkState& state, int k);

using RingObserver = std::function<void(double, const NetworkState&)>;

/// Event-by-event ring simulator. One exponential clock at the aggregate rate
/// n*lambda + mu*(#nonempty queues) drives the chain; the event category is
/// then chosen proportionally. Deterministic for a fixed (config, seed).
class RingSimulator {
 public:
  explicit RingSimulator(const RingConfig& config);

  const NetworkState& state() const { return state_; }
  const RingConfig& config() const { return cfg_; }

  /// Advance the clock to time t. Observer, when set, fires after each event.
  void advance_to(double t, const RingObserver& observer = {});

 private:
  void push_job(int node);
  void pop_job(int node);

  RingConfig cfg_;
  NetworkState state_;
  SplitRng rng_;
  std::vector<int> nonempty_;  // indices of nonempty queues, unordered
  std::vector<int> pos_;       // position of queue i in nonempty_, -1 if empty
};

/// Run from the empty state to config.horizon. Observer fires at every event.
NetworkState simulate(const RingConfig& config, const RingObserver& observer = {});

struct StationaryEstimate {
  ProportionVector mean;                   // time-averaged proportion vector
  std::map<SuperNode, double> std_errors;  // batch-means standard error per tuple
  long long n_samples = 0;
  int n_batches = 0;
};

/// Time-averaged proportion vector over n_samples snapshots taken every
/// sample_gap time units after burn_in, with batch-means standard errors
/// (20 batches; n_samples must be >= 20). Requires lambda < mu.
StationaryEstimate stationary_estimate(const RingConfig& config, double burn_in,
                                       long long n_samples, double sample_gap);

/// Generator of the full ring chain on {0..cap}^n_nodes: per-node Poisson
/// arrivals routed to the window minimum (ties split equally), service rate mu
/// per busy node, arrivals into full queues dropped. Guarded to 2e5 states.
SparseGenerator ring_exact_generator(int n_nodes, int k, double lambda, double mu, int cap);

struct RingExactSolution {
  ProportionVector law;  // stationary law over full queue vectors (arity n_nodes)
  double residual = 0.0;
};

/// Stationary law of ring_exact_generator, solved exactly.
RingExactSolution ring_exact_law(int n_nodes, int k, double lambda, double mu, int cap);

}  // namespace mflab
