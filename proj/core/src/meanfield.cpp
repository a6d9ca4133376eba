#include "mflab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "mflab/errors.hpp"

namespace mflab {

OdeState::OdeState(int k, int cap) : box(k + 1, cap), z(box.size(), 0.0) {
  z[0] = 1.0;  // all-zeros tuple is index 0
}

OdeState::OdeState(TupleBox b, std::vector<double> mass, double time)
    : box(std::move(b)), z(std::move(mass)), t(time) {
  if (z.size() != box.size()) throw DimensionError("OdeState: mass array does not match box");
}

double OdeState::sum() const {
  double s = 0.0;
  for (double v : z) s += v;
  return s;
}

double OdeState::min_entry() const {
  double m = z.empty() ? 0.0 : z[0];
  for (double v : z) m = std::min(m, v);
  return m;
}

ProportionVector OdeState::to_proportion() const {
  ProportionVector::Map entries;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] != 0.0) entries.emplace(box.decode(i), z[i]);
  return ProportionVector(k(), std::move(entries));
}

OdeState OdeState::from_proportion(const ProportionVector& p, int cap) {
  TupleBox b(p.k() + 1, cap);
  std::vector<double> mass(b.size(), 0.0);
  for (const auto& [u, v] : p.entries()) {
    if (!b.contains(u)) throw ConfigError("OdeState: tuple outside the box: " + u.label());
    mass[b.index(u)] = v;
  }
  OdeState s(std::move(b), std::move(mass));
  return s;
}

double selection_coefficient(int i, int j) {
  if (i < j) return 1.0;
  if (i == j) return 0.5;
  return 0.0;
}

double selection_coefficient_general(int value, const std::vector<int>& others) {
  int mult = 1;
  for (int o : others) {
    if (o < value) return 0.0;
    if (o == value) ++mult;
  }
  return 1.0 / static_cast<double>(mult);
}

namespace {

// Share of an arrival to tuple v routed through coordinate n, given v was
// formed by decrementing that coordinate: 1/(#argmin) when v[n] is minimal.
double inflow_share(const SuperNode& v, int n) {
  const int vn = v.q[static_cast<std::size_t>(n)];
  int mult = 1;
  for (std::size_t c = 0; c < v.q.size(); ++c) {
    if (c == static_cast<std::size_t>(n)) continue;
    if (v.q[c] < vn) return 0.0;
    if (v.q[c] == vn) ++mult;
  }
  return 1.0 / static_cast<double>(mult);
}

void check_state(const OdeState& s, int k) {
  if (s.box.dims() != k + 1) throw DimensionError("rhs: k does not match state arity");
}

}  // namespace

std::vector<double> rhs_k1(const OdeState& s, double lambda, double mu) {
  check_state(s, 1);
  const int cap = s.cap();
  const int stride = cap + 1;
  const double total_arrival = 2.0 * lambda;
  std::vector<double> d(s.z.size());

  auto idx = [stride](int i, int j) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(stride) +
           static_cast<std::size_t>(j);
  };

  for (int i = 0; i <= cap; ++i) {
    for (int j = 0; j <= cap; ++j) {
      const double zij = s.z[idx(i, j)];

      double arr_in = 0.0;
      if (i >= 1) arr_in += s.z[idx(i - 1, j)] * selection_coefficient(i - 1, j);
      if (j >= 1) arr_in += s.z[idx(i, j - 1)] * selection_coefficient(j - 1, i);
      // Arrivals leave every state except the all-cap corner, where the
      // target queue is full and the arrival is dropped.
      const double out_frac = std::min(i, j) < cap ? 1.0 : 0.0;

      double svc = 0.0;
      if (i < cap) svc += s.z[idx(i + 1, j)];
      if (i > 0) svc -= zij;
      if (j < cap) svc += s.z[idx(i, j + 1)];
      if (j > 0) svc -= zij;

      d[idx(i, j)] = total_arrival * (arr_in - zij * out_frac) + mu * svc;
    }
  }
  return d;
}

std::vector<double> rhs_general(const OdeState& s, int k, double lambda, double mu) {
  check_state(s, k);
  const int cap = s.cap();
  const int dims = k + 1;
  const double total_arrival = static_cast<double>(dims) * lambda;
  std::vector<double> d(s.z.size());

  SuperNode u;
  for (std::size_t idx = 0; idx < s.z.size(); ++idx) {
    u = s.box.decode(idx);
    const double zu = s.z[idx];

    double arr_in = 0.0;
    for (int n = 0; n < dims; ++n) {
      if (u.q[static_cast<std::size_t>(n)] == 0) continue;
      SuperNode v = u.shifted(n, -1);
      const double coef = inflow_share(v, n);
      if (coef != 0.0) arr_in += s.z[s.box.index(v)] * coef;
    }
    const double out_frac = u.min_value() < cap ? 1.0 : 0.0;

    double svc = 0.0;
    for (int n = 0; n < dims; ++n) {
      const int un = u.q[static_cast<std::size_t>(n)];
      if (un < cap) svc += s.z[s.box.index(u.shifted(n, +1))];
      if (un > 0) svc -= zu;
    }

    d[idx] = total_arrival * (arr_in - zu * out_frac) + mu * svc;
  }
  return d;
}

std::vector<double> rhs_literal(const OdeState& s, int k, double lambda, double mu) {
  check_state(s, k);
  const int cap = s.cap();
  const int dims = k + 1;
  const double total_arrival = static_cast<double>(k) * lambda;
  std::vector<double> d(s.z.size());

  SuperNode u;
  for (std::size_t idx = 0; idx < s.z.size(); ++idx) {
    u = s.box.decode(idx);
    const double zu = s.z[idx];

    double arr_in = 0.0;
    for (int n = 0; n < dims; ++n) {
      if (u.q[static_cast<std::size_t>(n)] == 0) continue;
      SuperNode v = u.shifted(n, -1);
      const double coef = inflow_share(v, n);
      if (coef != 0.0) arr_in += s.z[s.box.index(v)] * coef;
    }

    double svc = 0.0;
    for (int n = 0; n < dims; ++n) {
      const int un = u.q[static_cast<std::size_t>(n)];
      if (un < cap) svc += s.z[s.box.index(u.shifted(n, +1))];
      if (un > 0) svc -= zu;
    }

    d[idx] = total_arrival * arr_in + mu * svc;
  }
  return d;
}

namespace {

using RhsFn = std::vector<double> (*)(const OdeState&, int, double, double);

// One classical 4th-order step of size h, in place.
void rk4_step(OdeState& s, int k, double lambda, double mu, double h, RhsFn rhs) {
  const std::size_t n = s.z.size();
  const std::vector<double> z0 = s.z;
  std::vector<double> k1 = rhs(s, k, lambda, mu);

  for (std::size_t i = 0; i < n; ++i) s.z[i] = z0[i] + 0.5 * h * k1[i];
  std::vector<double> k2 = rhs(s, k, lambda, mu);
  for (std::size_t i = 0; i < n; ++i) s.z[i] = z0[i] + 0.5 * h * k2[i];
  std::vector<double> k3 = rhs(s, k, lambda, mu);
  for (std::size_t i = 0; i < n; ++i) s.z[i] = z0[i] + h * k3[i];
  std::vector<double> k4 = rhs(s, k, lambda, mu);

  for (std::size_t i = 0; i < n; ++i)
    s.z[i] = z0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  s.t += h;
}

RhsFn dispatch_general(bool literal) {
  return literal ? static_cast<RhsFn>(rhs_literal) : static_cast<RhsFn>(rhs_general);
}

}  // namespace

Trajectory integrate(const OdeState& z0, int k, double lambda, double mu, double t_max,
                     double dt, const IntegrationOptions& opts) {
  check_state(z0, k);
  if (dt <= 0.0) throw ConfigError("integrate: dt must be > 0");
  if (t_max < 0.0) throw ConfigError("integrate: t_max must be >= 0");
  if (std::abs(z0.sum() - 1.0) > 1e-9 || z0.min_entry() < -1e-12)
    throw ConfigError("integrate: initial state is not a probability vector");

  const RhsFn rhs = dispatch_general(opts.literal_drift);
  Trajectory out;
  OdeState s = z0;
  out.samples.push_back(s);

  double next_sample = opts.sample_interval > 0.0 ? s.t + opts.sample_interval : t_max + 1.0;
  const double t_end = z0.t + t_max;

  while (s.t < t_end - 1e-15 * std::max(1.0, std::abs(t_end))) {
    const double h = std::min(dt, t_end - s.t);
    rk4_step(s, k, lambda, mu, h, rhs);
    ++out.diagnostics.steps;

    double mass = 0.0, min_e = s.z[0];
    for (double v : s.z) {
      mass += v;
      min_e = std::min(min_e, v);
    }
    const double drift = std::abs(mass - 1.0);
    out.diagnostics.max_mass_drift = std::max(out.diagnostics.max_mass_drift, drift);
    out.diagnostics.min_entry_seen = std::min(out.diagnostics.min_entry_seen, min_e);
    if (!opts.literal_drift && drift > 1e-6)
      throw InstabilityError("integrate: mass drift " + std::to_string(drift) +
                             " in one step; reduce dt");

    for (double& v : s.z) {
      if (v < 0.0) {
        v = 0.0;
        ++out.diagnostics.clip_count;
      }
    }
    double mass2 = 0.0;
    for (double v : s.z) mass2 += v;
    if (mass2 <= 0.0) throw InstabilityError("integrate: state lost all mass");
    for (double& v : s.z) v /= mass2;

    if (opts.sample_interval > 0.0 && s.t >= next_sample - 1e-12) {
      out.samples.push_back(s);
      while (next_sample <= s.t + 1e-12) next_sample += opts.sample_interval;
    }
  }

  if (out.samples.back().t != s.t) out.samples.push_back(s);
  return out;
}

FixedPointResult fixed_point(int k, double lambda, double mu, int cap, double tolerance) {
  if (!(lambda < mu)) throw InstabilityError("fixed_point: requires lambda < mu");
  if (lambda < 0.0) throw ConfigError("fixed_point: lambda must be >= 0");
  if (tolerance <= 0.0) throw ConfigError("fixed_point: tolerance must be > 0");

  OdeState s(k, cap);
  const double dt = 0.1 / mu;
  const double block = 40.0 / mu;
  constexpr int kMaxBlocks = 400;

  double residual = 0.0;
  for (int b = 0;; ++b) {
    std::vector<double> d = rhs_general(s, k, lambda, mu);
    residual = 0.0;
    for (double v : d) residual = std::max(residual, std::abs(v));
    if (residual <= tolerance) break;
    if (b >= kMaxBlocks)
      throw DiagnosticError("fixed_point: no convergence; last residual " +
                            std::to_string(residual));
    Trajectory tr = integrate(s, k, lambda, mu, block, dt);
    s = std::move(tr.samples.back());
  }

  FixedPointResult out{std::move(s), residual, 0.0};
  for (std::size_t i = 0; i < out.state.z.size(); ++i) {
    const SuperNode u = out.state.box.decode(i);
    if (*std::max_element(u.q.begin(), u.q.end()) == cap) out.boundary_mass += out.state.z[i];
  }
  return out;
}

}  // namespace mflab
