#pragma once

#include <vector>

#include "mflab/box.hpp"
#include "mflab/proportion.hpp"

namespace mflab {

/// Dense probability mass over the tuple box {0..cap}^{k+1} at a point in
/// time. Entries may dip to -1e-12 transiently during integration; the
/// integrator clips and renormalizes each step.
struct OdeState {
  TupleBox box;
  std::vector<double> z;
  double t = 0.0;

  /// Point mass on the all-zeros tuple (empty system).
  OdeState(int k, int cap);
  OdeState(TupleBox b, std::vector<double> mass, double time = 0.0);

  int k() const { return box.dims() - 1; }
  int cap() const { return box.cap(); }
  double sum() const;
  double min_entry() const;
  ProportionVector to_proportion() const;
  static OdeState from_proportion(const ProportionVector& p, int cap);
};

/// Share of an arrival routed to the first queue of a pair (i, j): 1 when it
/// is strictly shorter, 1/2 on a tie, 0 otherwise.
double selection_coefficient(int i, int j);

/// Share routed to a queue of length `value` among a tuple whose remaining
/// entries are `others`: 1/(tie multiplicity) when value attains the minimum
/// of the whole tuple, else 0. Reduces to selection_coefficient for a pair.
double selection_coefficient_general(int value, const std::vector<int>& others);

/// Drift of the pair-tuple system (k = 1), written out in the two-coordinate
/// form. Out-of-box neighbors contribute zero; the arrival outflow of a state
/// whose minimum sits at the cap is suppressed, so the total derivative sums
/// to zero exactly.
std::vector<double> rhs_k1(const OdeState& s, double lambda, double mu);

/// Same drift for general k via the selection rule. For k = 1 this equals
/// rhs_k1 entry for entry, bit for bit.
std::vector<double> rhs_general(const OdeState& s, int k, double lambda, double mu);

/// Diagnostic variant behind the CLI switch --remark2-literal: total arrival
/// constant k*lambda instead of (k+1)*lambda and no arrival-outflow term.
/// Not mass-conserving; kept for side-by-side comparison only.
std::vector<double> rhs_literal(const OdeState& s, int k, double lambda, double mu);

struct IntegrationOptions {
  double sample_interval = 0.0;  // >0: record a state roughly every this much time
  bool literal_drift = false;    // integrate rhs_literal instead of rhs_general
};

struct IntegrationDiagnostics {
  double max_mass_drift = 0.0;  // max |sum(z) - 1| seen before renormalization
  double min_entry_seen = 0.0;  // most negative entry seen before clipping
  long long clip_count = 0;
  long long steps = 0;
};

struct Trajectory {
  std::vector<OdeState> samples;  // always includes the initial and final state
  IntegrationDiagnostics diagnostics;
};

/// Classical fixed-step 4th-order integration. Each step renormalizes the
/// mass to 1 and clips negative entries to 0 (both logged). Aborts with
/// InstabilityError when the pre-renormalization mass drifts beyond 1e-6 in
/// one step; the literal drift variant injects mass by construction, so the
/// monitor is disabled there and the drift is reported instead.
Trajectory integrate(const OdeState& z0, int k, double lambda, double mu,
                     double t_max, double dt, const IntegrationOptions& opts = {});

struct FixedPointResult {
  OdeState state;
  double residual = 0.0;       // max |dz/dt| at the returned state
  double boundary_mass = 0.0;  // mass on tuples with a coordinate at the cap
};

/// Equilibrium of the truncated system, found by integrating from the empty
/// state until max|rhs| <= tolerance. Throws InstabilityError when lambda >=
/// mu, DiagnosticError (with the last residual) when the step budget runs out.
FixedPointResult fixed_point(int k, double lambda, double mu, int cap,
                             double tolerance = 1e-10);

}  // namespace mflab
