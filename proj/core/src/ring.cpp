#include "mflab/ring.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mflab/box.hpp"
#include "mflab/errors.hpp"

namespace mflab {

namespace {

void check_topology(int n, int k) {
  if (n < 1) throw ConfigError("ring: n_nodes must be >= 1");
  if (k < 0 || k >= n) throw ConfigError("ring: k_neighbors must lie in [0, n_nodes-1]");
}

void check_rates(double lambda, double mu) {
  if (lambda < 0.0 || mu < 0.0) throw ConfigError("ring: rates must be >= 0");
}

}  // namespace

std::vector<int> neighbors(int i, int n, int k) {
  check_topology(n, k);
  if (i < 0 || i >= n) throw ConfigError("ring: node index out of range");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int d = 1; d <= k; ++d) out.push_back((i + d) % n);
  return out;
}

int route_arrival(const NetworkState& state, int i, int k, SplitRng& rng) {
  const int n = static_cast<int>(state.queues.size());
  check_topology(n, k);
  if (i < 0 || i >= n) throw ConfigError("ring: node index out of range");

  int best = i;
  int best_len = state.queues[static_cast<std::size_t>(i)];
  int ties = 1;
  // Walk the window in order; on a strict improvement restart the tie count.
  // Reservoir-free two-pass form keeps the draw count independent of state.
  std::vector<int> tied{i};
  for (int d = 1; d <= k; ++d) {
    const int c = (i + d) % n;
    const int len = state.queues[static_cast<std::size_t>(c)];
    if (len < best_len) {
      best = c;
      best_len = len;
      tied.assign(1, c);
      ties = 1;
    } else if (len == best_len) {
      tied.push_back(c);
      ++ties;
    }
  }
  if (ties == 1) return best;
  return tied[static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(ties)))];
}

SuperNode supernode_view(const NetworkState& state, int i, int k) {
  const int n = static_cast<int>(state.queues.size());
  check_topology(n, k);
  if (i < 0 || i >= n) throw ConfigError("ring: node index out of range");
  SuperNode u;
  u.q.reserve(static_cast<std::size_t>(k) + 1);
  for (int d = 0; d <= k; ++d) u.q.push_back(state.queues[static_cast<std::size_t>((i + d) % n)]);
  return u;
}

ProportionVector empirical_proportion(const NetworkState& state, int k) {
  const int n = static_cast<int>(state.queues.size());
  check_topology(n, k);
  std::map<SuperNode, long long> counts;
  for (int i = 0; i < n; ++i) ++counts[supernode_view(state, i, k)];

  // c/n per entry; the last entry is written as 1 - (sum of the others) so the
  // map sums to exactly 1 when accumulated in key order.
  ProportionVector::Map entries;
  double partial = 0.0;
  std::size_t seen = 0;
  for (const auto& [u, c] : counts) {
    ++seen;
    if (seen == counts.size()) {
      entries.emplace(u, 1.0 - partial);
    } else {
      const double v = static_cast<double>(c) / static_cast<double>(n);
      partial += v;
      entries.emplace(u, v);
    }
  }
  return ProportionVector(k, std::move(entries));
}

RingSimulator::RingSimulator(const RingConfig& config)
    : cfg_(config),
      rng_(config.seed) {
  check_topology(config.n_nodes, config.k_neighbors);
  check_rates(config.lambda, config.mu);
  state_.queues.assign(static_cast<std::size_t>(config.n_nodes), 0);
  state_.clock = 0.0;
  pos_.assign(static_cast<std::size_t>(config.n_nodes), -1);
}

void RingSimulator::push_job(int node) {
  if (state_.queues[static_cast<std::size_t>(node)]++ == 0) {
    pos_[static_cast<std::size_t>(node)] = static_cast<int>(nonempty_.size());
    nonempty_.push_back(node);
  }
}

void RingSimulator::pop_job(int node) {
  if (--state_.queues[static_cast<std::size_t>(node)] == 0) {
    // Swap-remove from the nonempty index.
    const int at = pos_[static_cast<std::size_t>(node)];
    const int moved = nonempty_.back();
    nonempty_[static_cast<std::size_t>(at)] = moved;
    pos_[static_cast<std::size_t>(moved)] = at;
    nonempty_.pop_back();
    pos_[static_cast<std::size_t>(node)] = -1;
  }
}

void RingSimulator::advance_to(double t, const RingObserver& observer) {
  const int n = cfg_.n_nodes;
  const double arrival_total = static_cast<double>(n) * cfg_.lambda;

  while (state_.clock < t) {
    const double total = arrival_total + cfg_.mu * static_cast<double>(nonempty_.size());
    if (total <= 0.0) {
      state_.clock = t;  // frozen: nothing can happen
      break;
    }
    const double wait = rng_.exponential(total);
    if (state_.clock + wait >= t) {
      // By memorylessness the unused residual can be discarded.
      state_.clock = t;
      break;
    }
    state_.clock += wait;

    if (rng_.uniform01() * total < arrival_total) {
      const int entry = static_cast<int>(rng_.uniform_below(static_cast<std::uint64_t>(n)));
      push_job(route_arrival(state_, entry, cfg_.k_neighbors, rng_));
    } else {
      const std::size_t pick =
          static_cast<std::size_t>(rng_.uniform_below(static_cast<std::uint64_t>(nonempty_.size())));
      pop_job(nonempty_[pick]);
    }
    if (observer) observer(state_.clock, state_);
  }
}

NetworkState simulate(const RingConfig& config, const RingObserver& observer) {
  if (config.horizon <= 0.0) throw ConfigError("simulate: horizon must be > 0");
  RingSimulator sim(config);
  sim.advance_to(config.horizon, observer);
  return sim.state();
}

StationaryEstimate stationary_estimate(const RingConfig& config, double burn_in,
                                       long long n_samples, double sample_gap) {
  if (!(config.lambda < config.mu))
    throw InstabilityError("stationary_estimate: requires lambda < mu");
  if (burn_in < 0.0) throw ConfigError("stationary_estimate: burn_in must be >= 0");
  if (sample_gap <= 0.0) throw ConfigError("stationary_estimate: sample_gap must be > 0");
  constexpr int kBatches = 20;
  if (n_samples < kBatches)
    throw ConfigError("stationary_estimate: need at least 20 samples for batch means");

  RingSimulator sim(config);
  sim.advance_to(burn_in);

  const long long per_batch = n_samples / kBatches;
  std::map<SuperNode, long long> total;
  std::vector<std::map<SuperNode, long long>> batch(kBatches);
  std::vector<long long> batch_size(kBatches, 0);

  for (long long s = 0; s < n_samples; ++s) {
    sim.advance_to(burn_in + static_cast<double>(s + 1) * sample_gap);
    const int b = static_cast<int>(std::min<long long>(s / per_batch, kBatches - 1));
    ++batch_size[static_cast<std::size_t>(b)];
    for (int i = 0; i < config.n_nodes; ++i) {
      const SuperNode u = supernode_view(sim.state(), i, config.k_neighbors);
      ++total[u];
      ++batch[static_cast<std::size_t>(b)][u];
    }
  }

  const double denom = static_cast<double>(config.n_nodes) * static_cast<double>(n_samples);
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
  out.mean = ProportionVector(config.k_neighbors, std::move(entries));
  out.n_samples = n_samples;
  out.n_batches = kBatches;
  for (const auto& [u, c] : total) {
    double mean_of_means = 0.0;
    std::vector<double> bm(kBatches);
    for (int b = 0; b < kBatches; ++b) {
      const auto& m = batch[static_cast<std::size_t>(b)];
      const auto it = m.find(u);
      const double cnt = it == m.end() ? 0.0 : static_cast<double>(it->second);
      bm[static_cast<std::size_t>(b)] =
          cnt / (static_cast<double>(config.n_nodes) *
                 static_cast<double>(batch_size[static_cast<std::size_t>(b)]));
      mean_of_means += bm[static_cast<std::size_t>(b)];
    }
    mean_of_means /= kBatches;
    double var = 0.0;
    for (double v : bm) var += (v - mean_of_means) * (v - mean_of_means);
    var /= (kBatches - 1);
    out.std_errors[u] = std::sqrt(var / kBatches);
  }
  return out;
}

SparseGenerator ring_exact_generator(int n_nodes, int k, double lambda, double mu, int cap) {
  check_topology(n_nodes, k);
  check_rates(lambda, mu);
  if (cap < 1) throw ConfigError("ring_exact_generator: cap must be >= 1");
  const TupleBox box(n_nodes, cap);
  if (box.size() > 200000) throw ConfigError("ring_exact_generator: state space above 2e5");

  SparseGenerator g(box.size());
  for (std::size_t s = 0; s < box.size(); ++s) {
    const SuperNode q = box.decode(s);
    for (int i = 0; i < n_nodes; ++i) {
      // Window minimum and its multiplicity for the stream entering at i.
      int best = q[i];
      for (int d = 1; d <= k; ++d) best = std::min(best, q[(i + d) % n_nodes]);
      int ties = 0;
      for (int d = 0; d <= k; ++d)
        if (q[(i + d) % n_nodes] == best) ++ties;
      const double share = lambda / static_cast<double>(ties);
      for (int d = 0; d <= k; ++d) {
        const int c = (i + d) % n_nodes;
        if (q[c] != best || q[c] >= cap) continue;
        g.add_rate(s, box.index(q.shifted(c, +1)), share);
      }
    }
    for (int i = 0; i < n_nodes; ++i)
      if (q[i] > 0) g.add_rate(s, box.index(q.shifted(i, -1)), mu);
  }
  return g;
}

RingExactSolution ring_exact_law(int n_nodes, int k, double lambda, double mu, int cap) {
  const SparseGenerator g = ring_exact_generator(n_nodes, k, lambda, mu, cap);
  const std::vector<double> pi = stationary_distribution(g);
  const TupleBox box(n_nodes, cap);
  ProportionVector::Map entries;
  for (std::size_t s = 0; s < box.size(); ++s)
    if (pi[s] != 0.0) entries.emplace(box.decode(s), pi[s]);
  return {ProportionVector(n_nodes - 1, std::move(entries)), g.residual(pi)};
}

}  // namespace mflab
