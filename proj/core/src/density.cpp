#include "mflab/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "mflab/box.hpp"
#include "mflab/errors.hpp"
#include "mflab/rng.hpp"

namespace mflab {

int CountVector::arity() const {
  return counts.empty() ? 0 : counts.begin()->first.size();
}

ProportionVector CountVector::to_proportion() const {
  validate();
  ProportionVector::Map entries;
  double partial = 0.0;
  std::size_t seen = 0;
  std::size_t nonzero = 0;
  for (const auto& [u, c] : counts)
    if (c > 0) ++nonzero;
  for (const auto& [u, c] : counts) {
    if (c <= 0) continue;
    ++seen;
    if (seen == nonzero) {
      entries.emplace(u, 1.0 - partial);
    } else {
      const double v = static_cast<double>(c) / static_cast<double>(n);
      partial += v;
      entries.emplace(u, v);
    }
  }
  return ProportionVector(arity() - 1, std::move(entries));
}

CountVector CountVector::from_proportion(const ProportionVector& z, long long n) {
  if (n < 1) throw ConfigError("CountVector: n must be >= 1");
  CountVector m;
  m.n = n;
  long long total = 0;
  for (const auto& [u, v] : z.entries()) {
    const double scaled = static_cast<double>(n) * v;
    const long long c = static_cast<long long>(std::llround(scaled));
    if (std::abs(scaled - static_cast<double>(c)) > 1e-6)
      throw ConfigError("CountVector: " + u.label() + " is not divisible by n");
    if (c > 0) {
      m.counts.emplace(u, c);
      total += c;
    }
  }
  if (total != n) throw ConfigError("CountVector: rounded counts do not sum to n");
  return m;
}

void CountVector::validate() const {
  if (n < 1) throw ConfigError("CountVector: n must be >= 1");
  long long total = 0;
  const int a = arity();
  if (a == 0) throw ConfigError("CountVector: no entries");
  for (const auto& [u, c] : counts) {
    if (u.size() != a) throw DimensionError("CountVector: mixed tuple arities");
    for (int v : u.q)
      if (v < 0) throw ConfigError("CountVector: negative coordinate");
    if (c < 0) throw ConfigError("CountVector: negative count");
    total += c;
  }
  if (total != n) throw ConfigError("CountVector: counts do not sum to n");
}

std::vector<Transition> enabled_transitions(const CountVector& m, int k, double lambda,
                                            double mu, std::optional<int> cap,
                                            ArrivalRule rule) {
  m.validate();
  if (m.arity() != k + 1) throw DimensionError("enabled_transitions: k does not match arity");
  const int arrival_factor = rule == ArrivalRule::kStandard ? k + 1 : k;

  std::vector<Transition> out;
  for (const auto& [u, c] : m.counts) {
    if (c == 0) continue;
    const std::vector<int> mins = u.argmin();
    const double total_arrival =
        static_cast<double>(arrival_factor) * lambda * static_cast<double>(c);
    const double share = total_arrival / static_cast<double>(mins.size());
    if (share > 0.0) {
      for (int coord : mins) {
        if (cap && u[coord] >= *cap) continue;  // blocked at the cap
        out.push_back({u, u.shifted(coord, +1), share});
      }
    }
    const double service = mu * static_cast<double>(c);
    if (service > 0.0) {
      for (int coord = 0; coord <= k; ++coord)
        if (u[coord] > 0) out.push_back({u, u.shifted(coord, -1), service});
    }
  }
  return out;
}

namespace {

void apply_jump(CountVector& m, const Transition& tr) {
  auto it = m.counts.find(tr.remove);
  if (--(it->second) == 0) m.counts.erase(it);
  ++m.counts[tr.add];
}

}  // namespace

CountVector gillespie_simulate(const CountVector& initial, int k, double lambda, double mu,
                               double horizon, std::uint64_t seed,
                               const DensityObserver& observer, const GillespieOptions& opts) {
  initial.validate();
  if (horizon <= 0.0) throw ConfigError("gillespie_simulate: horizon must be > 0");

  CountVector cur = initial;
  SplitRng rng(seed);
  double t = 0.0;
  long long events = 0;

  while (opts.max_events < 0 || events < opts.max_events) {
    const std::vector<Transition> jumps =
        enabled_transitions(cur, k, lambda, mu, opts.cap, opts.rule);
    double total = 0.0;
    for (const Transition& tr : jumps) total += tr.rate;
    if (total <= 0.0) break;  // frozen until the horizon

    t += rng.exponential(total);
    if (t >= horizon) break;

    double r = rng.uniform01() * total;
    std::size_t pick = 0;
    for (; pick + 1 < jumps.size(); ++pick) {
      r -= jumps[pick].rate;
      if (r < 0.0) break;
    }
    apply_jump(cur, jumps[pick]);
    ++events;
    if (observer) observer(t, cur);
  }
  return cur;
}

double generator_apply(const std::function<double(const ProportionVector&)>& f,
                       const CountVector& m, int k, double lambda, double mu,
                       std::optional<int> cap, ArrivalRule rule) {
  const std::vector<Transition> jumps = enabled_transitions(m, k, lambda, mu, cap, rule);
  const double before = f(m.to_proportion());
  double acc = 0.0;
  for (const Transition& tr : jumps) {
    CountVector next = m;
    apply_jump(next, tr);
    acc += tr.rate * (f(next.to_proportion()) - before);
  }
  return acc;
}

namespace {

// Count states are multisets of tuple indices, stored as nondecreasing
// vectors. Enumeration is lexicographic, which makes solver output stable.
void enumerate_multisets(int slots, int first, int limit, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
  if (slots == 0) {
    out.push_back(cur);
    return;
  }
  for (int v = first; v < limit; ++v) {
    cur.push_back(v);
    enumerate_multisets(slots - 1, v, limit, cur, out);
    cur.pop_back();
  }
}

CountVector to_count_vector(const std::vector<int>& sorted_ids, const TupleBox& box) {
  CountVector m;
  m.n = static_cast<long long>(sorted_ids.size());
  for (int id : sorted_ids) ++m.counts[box.decode(static_cast<std::size_t>(id))];
  return m;
}

}  // namespace

ExactStationaryResult exact_stationary(long long n, int k, double lambda, double mu, int cap) {
  if (n < 1) throw ConfigError("exact_stationary: n must be >= 1");
  if (cap < 1) throw ConfigError("exact_stationary: cap must be >= 1");
  if (!(lambda < mu)) throw InstabilityError("exact_stationary: requires lambda < mu");

  const TupleBox box(k + 1, cap);
  const double tuples = static_cast<double>(box.size());
  // C(T + n - 1, n) states; refuse before materializing anything too large.
  double approx_states = 1.0;
  for (long long i = 1; i <= n; ++i)
    approx_states *= (tuples + static_cast<double>(n - i)) / static_cast<double>(i);
  if (approx_states > 5e5) throw ConfigError("exact_stationary: state space above 5e5");

  std::vector<std::vector<int>> states;
  std::vector<int> cur;
  enumerate_multisets(static_cast<int>(n), 0, static_cast<int>(box.size()), cur, states);

  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t s = 0; s < states.size(); ++s) index.emplace(states[s], s);

  SparseGenerator g(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const CountVector m = to_count_vector(states[s], box);
    for (const Transition& tr : enabled_transitions(m, k, lambda, mu, cap)) {
      std::vector<int> next = states[s];
      const int from = static_cast<int>(box.index(tr.remove));
      const int to = static_cast<int>(box.index(tr.add));
      next.erase(std::find(next.begin(), next.end(), from));
      next.insert(std::upper_bound(next.begin(), next.end(), to), to);
      g.add_rate(s, index.at(next), tr.rate);
    }
  }

  ExactStationaryResult out;
  out.pi = stationary_distribution(g);
  out.residual = g.residual(out.pi);

  std::map<SuperNode, double> mean;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const CountVector m = to_count_vector(states[s], box);
    out.states.push_back(m);
    bool capped = false;
    for (const auto& [u, c] : m.counts) {
      mean[u] += out.pi[s] * static_cast<double>(c);
      if (*std::max_element(u.q.begin(), u.q.end()) == cap) capped = true;
    }
    if (capped) out.boundary_mass += out.pi[s];
  }
  ProportionVector::Map entries;
  for (auto& [u, v] : mean) {
    const double w = v / static_cast<double>(n);
    if (w != 0.0) entries.emplace(u, w);
  }
  out.mean_proportion = ProportionVector(k, std::move(entries));
  return out;
}

}  // namespace mflab
