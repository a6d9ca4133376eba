#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mflab/errors.hpp"

namespace mflab {

/// Sparse rate matrix of a finite-state continuous-time Markov chain over an
/// externally owned state enumeration. Off-diagonal rates are stored per row;
/// the diagonal is the negated row sum, so rows sum to zero by construction.
class SparseGenerator {
 public:
  explicit SparseGenerator(std::size_t n_states) : rows_(n_states), out_rate_(n_states, 0.0) {}

  std::size_t n_states() const { return rows_.size(); }

  void add_rate(std::size_t from, std::size_t to, double rate) {
    if (rate < 0.0) throw StructuralError("SparseGenerator: negative rate");
    if (rate == 0.0 || from == to) return;
    rows_[from].emplace_back(to, rate);
    out_rate_[from] += rate;
  }

  const std::vector<std::pair<std::size_t, double>>& row(std::size_t i) const { return rows_[i]; }
  /// Total outflow rate of state i (= -diagonal entry).
  double out_rate(std::size_t i) const { return out_rate_[i]; }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }

  /// Largest total outflow rate over all states (uniformization constant).
  double max_out_rate() const;

  /// ||pi Q||_inf for a row vector pi.
  double residual(const std::vector<double>& pi) const;

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
  std::vector<double> out_rate_;
};

/// Stationary law pi of the chain: solves pi Q = 0, sum(pi) = 1. Uses a sparse
/// direct factorization up to 2e5 states and a uniformization power iteration
/// beyond that (residual target 1e-12). Output order follows the enumeration,
/// so results are reproducible bit for bit. Throws StructuralError when the
/// chain is reducible (zero pivot or non-convergence).
std::vector<double> stationary_distribution(const SparseGenerator& g);

}  // namespace mflab
