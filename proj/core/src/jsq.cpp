#include "mflab/jsq.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mflab/errors.hpp"

namespace mflab {

SparseGenerator jsq_generator(int k, double lambda, double mu, int cap) {
  if (k < 0) throw ConfigError("jsq_generator: k must be >= 0");
  if (cap < 1) throw ConfigError("jsq_generator: cap must be >= 1");
  if (lambda < 0.0 || mu < 0.0) throw ConfigError("jsq_generator: rates must be >= 0");

  const TupleBox box(k + 1, cap);
  SparseGenerator g(box.size());
  const double total_arrival = (k + 1) * lambda;

  for (std::size_t s = 0; s < box.size(); ++s) {
    SuperNode u = box.decode(s);
    const std::vector<int> mins = u.argmin();
    const double per_min = total_arrival / static_cast<double>(mins.size());
    for (int c : mins) {
      if (u[c] >= cap) continue;  // blocked arrival
      g.add_rate(s, box.index(u.shifted(c, +1)), per_min);
    }
    for (int c = 0; c <= k; ++c)
      if (u[c] > 0) g.add_rate(s, box.index(u.shifted(c, -1)), mu);
  }
  return g;
}

double mm1_analytic(double lambda, double mu, int n) {
  if (!(lambda < mu)) throw InstabilityError("mm1_analytic: requires lambda < mu");
  if (lambda < 0.0 || n < 0) throw ConfigError("mm1_analytic: bad argument");
  const double rho = lambda / mu;
  return (1.0 - rho) * std::pow(rho, n);
}

JsqSolution jsq_stationary_law(int k, double lambda, double mu, int cap) {
  const SparseGenerator g = jsq_generator(k, lambda, mu, cap);
  const std::vector<double> pi = stationary_distribution(g);

  const TupleBox box(k + 1, cap);
  ProportionVector::Map entries;
  for (std::size_t s = 0; s < box.size(); ++s)
    if (pi[s] != 0.0) entries.emplace(box.decode(s), pi[s]);
  return {ProportionVector(k, std::move(entries)), g.residual(pi)};
}

std::vector<double> marginal_queue_law(const ProportionVector& p) {
  const int dims = p.k() + 1;
  int max_coord = 0;
  for (const auto& [u, w] : p.entries())
    for (int c = 0; c < dims; ++c) max_coord = std::max(max_coord, u[c]);

  std::vector<std::vector<double>> marg(dims, std::vector<double>(max_coord + 1, 0.0));
  for (const auto& [u, w] : p.entries())
    for (int c = 0; c < dims; ++c) marg[c][u[c]] += w;

  for (int c = 1; c < dims; ++c)
    for (int v = 0; v <= max_coord; ++v)
      if (std::abs(marg[c][v] - marg[0][v]) > 1e-9)
        throw DiagnosticError("marginal_queue_law: coordinate marginals disagree");
  return marg[0];
}

}  // namespace mflab
