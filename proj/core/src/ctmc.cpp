#include "mflab/ctmc.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace mflab {

double SparseGenerator::max_out_rate() const {
  double m = 0.0;
  for (double r : out_rate_) m = std::max(m, r);
  return m;
}

double SparseGenerator::residual(const std::vector<double>& pi) const {
  std::vector<double> acc(n_states(), 0.0);
  for (std::size_t i = 0; i < n_states(); ++i) {
    if (pi[i] == 0.0) continue;
    acc[i] -= pi[i] * out_rate_[i];
    for (const auto& [to, rate] : rows_[i]) acc[to] += pi[i] * rate;
  }
  double m = 0.0;
  for (double v : acc) m = std::max(m, std::abs(v));
  return m;
}

namespace {

constexpr double kResidualTol = 1e-12;
constexpr std::size_t kDirectLimit = 200000;

void clip_and_normalize(std::vector<double>& pi) {
  double sum = 0.0;
  for (double& v : pi) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) throw StructuralError("stationary_distribution: solution has no mass");
  for (double& v : pi) v /= sum;
}

std::vector<double> solve_direct(const SparseGenerator& g) {
  const std::size_t n = g.n_states();
  using Sp = Eigen::SparseMatrix<double>;

  // Transposed generator with the last balance equation replaced by the
  // normalization constraint sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(g.nnz() + 2 * n);
  for (std::size_t from = 0; from < n; ++from) {
    if (from != n - 1 && g.out_rate(from) > 0.0)
      trips.emplace_back(static_cast<int>(from), static_cast<int>(from), -g.out_rate(from));
    for (const auto& [to, rate] : g.row(from))
      if (to != n - 1) trips.emplace_back(static_cast<int>(to), static_cast<int>(from), rate);
  }
  for (std::size_t j = 0; j < n; ++j)
    trips.emplace_back(static_cast<int>(n - 1), static_cast<int>(j), 1.0);

  Sp a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();

  Eigen::SparseLU<Sp, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success)
    throw StructuralError("stationary_distribution: singular balance system (reducible chain?)");

  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  b[static_cast<Eigen::Index>(n - 1)] = 1.0;
  Eigen::VectorXd x = lu.solve(b);

  // One round of iterative refinement recovers digits the factorization lost.
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXd r = b - a * x;
    if (r.lpNorm<Eigen::Infinity>() < 1e-15) break;
    x += lu.solve(r);
  }

  std::vector<double> pi(x.data(), x.data() + n);
  clip_and_normalize(pi);
  return pi;
}

std::vector<double> solve_uniformized(const SparseGenerator& g) {
  const std::size_t n = g.n_states();
  const double lambda = g.max_out_rate() * 1.05 + 1e-300;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> flow(n, 0.0);

  constexpr int kMaxSweeps = 4000000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    std::fill(flow.begin(), flow.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (pi[i] == 0.0) continue;
      flow[i] -= pi[i] * g.out_rate(i);
      for (const auto& [to, rate] : g.row(i)) flow[to] += pi[i] * rate;
    }
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res = std::max(res, std::abs(flow[i]));
      pi[i] += flow[i] / lambda;
    }
    if (res <= kResidualTol) {
      clip_and_normalize(pi);
      return pi;
    }
  }
  throw StructuralError("stationary_distribution: power iteration did not converge");
}

}  // namespace

std::vector<double> stationary_distribution(const SparseGenerator& g) {
  if (g.n_states() == 0) throw StructuralError("stationary_distribution: empty chain");
  if (g.n_states() == 1) return {1.0};

  std::vector<double> pi =
      g.n_states() <= kDirectLimit ? solve_direct(g) : solve_uniformized(g);
  if (g.residual(pi) > kResidualTol)
    throw StructuralError("stationary_distribution: residual above tolerance");
  return pi;
}

}  // namespace mflab
