#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "mflab/density.hpp"
#include "mflab/proportion.hpp"
#include "mflab/rng.hpp"
#include "mflab/supernode.hpp"

namespace testutil {

// Independent birth-death oracle: balance equations pi_{n+1} mu = pi_n lambda
// solved by recursion and normalized over the untruncated tail analytically.
// Kept free of any library code so equilibrium claims are cross-checked.
inline std::vector<double> geometric_balance_law(double lambda, double mu, int n_max) {
  const double rho = lambda / mu;
  std::vector<double> pi(static_cast<std::size_t>(n_max) + 1);
  pi[0] = 1.0 - rho;  // normalizing constant of the full geometric series
  for (int n = 0; n < n_max; ++n)
    pi[static_cast<std::size_t>(n) + 1] = pi[static_cast<std::size_t>(n)] * rho;
  return pi;
}

// Same recursion on a finite box with blocked arrivals at cap B.
inline std::vector<double> truncated_balance_law(double lambda, double mu, int cap) {
  const double rho = lambda / mu;
  std::vector<double> pi(static_cast<std::size_t>(cap) + 1);
  pi[0] = 1.0;
  double total = 1.0;
  for (int n = 0; n < cap; ++n) {
    pi[static_cast<std::size_t>(n) + 1] = pi[static_cast<std::size_t>(n)] * rho;
    total += pi[static_cast<std::size_t>(n) + 1];
  }
  for (double& v : pi) v /= total;
  return pi;
}

// Random sparse vector over (k+1)-tuples with coordinates below bound,
// normalized to a probability vector. about one tuple in three is dropped to
// vary the support.
inline mflab::ProportionVector random_proportion(mflab::SplitRng& rng, int k, int bound,
                                                 int support_hint) {
  std::map<mflab::SuperNode, double> entries;
  double total = 0.0;
  for (int s = 0; s < support_hint; ++s) {
    mflab::SuperNode u;
    for (int d = 0; d <= k; ++d)
      u.q.push_back(static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(bound))));
    if (rng.uniform01() < 1.0 / 3.0) continue;
    const double w = rng.uniform01();
    entries[u] += w;
    total += w;
  }
  if (entries.empty() || total <= 0.0) {
    entries[mflab::SuperNode{std::vector<int>(static_cast<std::size_t>(k) + 1, 0)}] = 1.0;
    total = 1.0;
  }
  mflab::ProportionVector::Map out;
  for (auto& [u, w] : entries) out.emplace(u, w / total);
  return mflab::ProportionVector(k, std::move(out));
}

// Random count vector: n members spread over tuples with coordinates < bound.
inline mflab::CountVector random_count_vector(mflab::SplitRng& rng, int n, int k, int bound) {
  mflab::CountVector m;
  m.n = n;
  for (int i = 0; i < n; ++i) {
    mflab::SuperNode u;
    for (int d = 0; d <= k; ++d) {
      // bias toward structural zeros so boundary cases show up
      const bool zero = rng.uniform01() < 0.3;
      u.q.push_back(zero ? 0
                         : static_cast<int>(
                               rng.uniform_below(static_cast<std::uint64_t>(bound))));
    }
    ++m.counts[u];
  }
  return m;
}

}  // namespace testutil
