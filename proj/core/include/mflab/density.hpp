#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mflab/ctmc.hpp"
#include "mflab/proportion.hpp"

namespace mflab {

/// Integer occupancy of supernode configurations: counts[u] supernodes
/// currently observe tuple u, summing to n.
struct CountVector {
  long long n = 0;
  std::map<SuperNode, long long> counts;

  /// Tuple arity k+1 (0 when empty).
  int arity() const;
  /// counts/n with the exact-sum construction used by empirical_proportion.
  ProportionVector to_proportion() const;
  /// Rounds n*z_u per entry; the rounded counts must sum to n.
  static CountVector from_proportion(const ProportionVector& z, long long n);
  /// Throws unless entries are >= 0 with uniform arity and total n >= 1.
  void validate() const;
};

/// One jump of the count chain: one supernode leaves configuration `remove`
/// for configuration `add` (one coordinate changed by +-1) at the given rate.
struct Transition {
  SuperNode remove;
  SuperNode add;
  double rate = 0.0;
};

/// Total arrival rate attributed to one supernode: (k+1)*lambda normally;
/// k*lambda under the variant behind the CLI switch --remark2-literal, kept
/// for side-by-side diagnostics.
enum class ArrivalRule { kStandard, kLiteral };

/// All positive-rate jumps out of state m: per configuration u held by c > 0
/// supernodes, arrivals at total rate c * (arrival constant) split equally
/// over the argmin coordinates, and services at rate mu*c per positive
/// coordinate. With a cap, arrivals into coordinates at the cap are dropped.
std::vector<Transition> enabled_transitions(const CountVector& m, int k, double lambda,
                                            double mu, std::optional<int> cap = std::nullopt,
                                            ArrivalRule rule = ArrivalRule::kStandard);

using DensityObserver = std::function<void(double, const CountVector&)>;

struct GillespieOptions {
  std::optional<int> cap;
  long long max_events = -1;  // < 0: no event bound
  ArrivalRule rule = ArrivalRule::kStandard;
};

/// Exact stochastic simulation of the chain defined by enabled_transitions:
/// exponential holding time at the total rate, jump chosen proportionally.
/// Observer fires after each applied jump. When every rate vanishes the state
/// is frozen and returned as the state at the horizon. Deterministic per seed.
CountVector gillespie_simulate(const CountVector& initial, int k, double lambda, double mu,
                               double horizon, std::uint64_t seed,
                               const DensityObserver& observer = {},
                               const GillespieOptions& opts = {});

/// Generator applied to a test function: sum over enabled transitions of
/// rate * (f(state after) - f(state before)), states read as proportions.
double generator_apply(const std::function<double(const ProportionVector&)>& f,
                       const CountVector& m, int k, double lambda, double mu,
                       std::optional<int> cap = std::nullopt,
                       ArrivalRule rule = ArrivalRule::kStandard);

struct ExactStationaryResult {
  std::vector<CountVector> states;  // enumeration order
  std::vector<double> pi;           // stationary law, aligned with states
  ProportionVector mean_proportion; // expectation of counts/n under pi
  double boundary_mass = 0.0;       // mass on states holding a capped tuple
  double residual = 0.0;            // ||pi Q||_inf
};

/// Stationary law of the count chain with all coordinates capped (blocked
/// arrivals), solved exactly. The number of capped count states is guarded to
/// 5e5. Requires lambda < mu.
ExactStationaryResult exact_stationary(long long n, int k, double lambda, double mu, int cap);

}  // namespace mflab
