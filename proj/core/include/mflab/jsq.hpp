#pragma once

#include <vector>

#include "mflab/box.hpp"
#include "mflab/ctmc.hpp"
#include "mflab/proportion.hpp"

namespace mflab {

/// Generator of the symmetric shortest-queue system with k+1 queues: one
/// Poisson stream of total rate (k+1)*lambda routed to the smallest queue
/// (ties split equally), service rate mu per busy queue. Queues are capped at
/// `cap`; an arrival whose target sits at the cap is dropped. States are the
/// tuples of TupleBox(k+1, cap) in lexicographic order.
SparseGenerator jsq_generator(int k, double lambda, double mu, int cap);

/// M/M/1 stationary probability (1 - rho) rho^n with rho = lambda/mu.
/// Requires lambda < mu.
double mm1_analytic(double lambda, double mu, int n);

/// Stationary law of jsq_generator in tuple form, plus the balance residual
/// ||pi Q||_inf of the solve.
struct JsqSolution {
  ProportionVector law;
  double residual = 0.0;
};
JsqSolution jsq_stationary_law(int k, double lambda, double mu, int cap);

/// Law of the first coordinate of a tuple distribution. All coordinates must
/// carry the same marginal within 1e-9 (the model is exchangeable); a larger
/// spread throws DiagnosticError.
std::vector<double> marginal_queue_law(const ProportionVector& p);

}  // namespace mflab
