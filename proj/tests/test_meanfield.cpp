#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mflab/errors.hpp"
#include "mflab/jsq.hpp"
#include "mflab/meanfield.hpp"
#include "mflab/rng.hpp"
#include "test_util.hpp"

using namespace mflab;

namespace {

// random dense state on the box, normalized, with some structural zeros
OdeState random_state(SplitRng& rng, int k, int cap) {
  const TupleBox box(k + 1, cap);
  std::vector<double> z(box.size());
  double total = 0.0;
  for (double& v : z) {
    v = rng.uniform01() < 0.3 ? 0.0 : rng.uniform01();
    total += v;
  }
  if (total == 0.0) {
    z[0] = 1.0;
    total = 1.0;
  }
  for (double& v : z) v /= total;
  return OdeState(box, std::move(z));
}

double sum_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("selection coefficients take their three exact values") {
  CHECK(selection_coefficient(0, 3) == 1.0);
  CHECK(selection_coefficient(2, 2) == 0.5);
  CHECK(selection_coefficient(5, 1) == 0.0);

  CHECK(selection_coefficient_general(1, {3, 4}) == 1.0);
  CHECK(selection_coefficient_general(2, {2, 5}) == 0.5);
  CHECK(selection_coefficient_general(4, {1, 2}) == 0.0);
  // pair reduction
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(selection_coefficient_general(i, {j}) == selection_coefficient(i, j));
}

TEST_CASE("point mass drift at the empty pair state") {
  const double lambda = 0.7, mu = 1.0;
  OdeState s(1, 5);
  const std::vector<double> d = rhs_k1(s, lambda, mu);
  const TupleBox& box = s.box;
  CHECK(d[box.index(SuperNode{0, 0})] == doctest::Approx(-2.0 * lambda).epsilon(1e-15));
  CHECK(d[box.index(SuperNode{1, 0})] == doctest::Approx(lambda).epsilon(1e-15));
  CHECK(d[box.index(SuperNode{0, 1})] == doctest::Approx(lambda).epsilon(1e-15));
  double rest = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (i != box.index(SuperNode{0, 0}) && i != box.index(SuperNode{1, 0}) &&
        i != box.index(SuperNode{0, 1}))
      rest += std::abs(d[i]);
  CHECK(rest == 0.0);
  CHECK(std::abs(sum_of(d)) <= 1e-15);
}

TEST_CASE("rhs preserves exchange symmetry") {
  SplitRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    OdeState s = random_state(rng, 1, 6);
    // symmetrize
    const TupleBox& box = s.box;
    for (int i = 0; i <= 6; ++i)
      for (int j = i + 1; j <= 6; ++j) {
        const double avg = 0.5 * (s.z[box.index(SuperNode{i, j})] +
                                  s.z[box.index(SuperNode{j, i})]);
        s.z[box.index(SuperNode{i, j})] = avg;
        s.z[box.index(SuperNode{j, i})] = avg;
      }
    const std::vector<double> d = rhs_k1(s, 0.6, 1.1);
    for (int i = 0; i <= 6; ++i)
      for (int j = 0; j <= 6; ++j)
        CHECK(d[box.index(SuperNode{i, j})] ==
              doctest::Approx(d[box.index(SuperNode{j, i})]).epsilon(1e-14));
  }
}

TEST_CASE("general-k path specializes to the pair path bit for bit") {
  SplitRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const OdeState s = random_state(rng, 1, 7);
    const std::vector<double> a = rhs_k1(s, 0.7, 1.0);
    const std::vector<double> b = rhs_general(s, 1, 0.7, 1.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("k=0 reduces to the single-queue forward equations") {
  SplitRng rng(13);
  const double lambda = 0.5, mu = 1.2;
  for (int trial = 0; trial < 50; ++trial) {
    const OdeState s = random_state(rng, 0, 9);
    const std::vector<double> d = rhs_general(s, 0, lambda, mu);
    const int cap = s.cap();
    for (int n = 0; n <= cap; ++n) {
      const double in_arr = n > 0 ? lambda * s.z[static_cast<std::size_t>(n - 1)] : 0.0;
      const double out_arr = n < cap ? lambda * s.z[static_cast<std::size_t>(n)] : 0.0;
      const double in_svc = n < cap ? mu * s.z[static_cast<std::size_t>(n + 1)] : 0.0;
      const double out_svc = n > 0 ? mu * s.z[static_cast<std::size_t>(n)] : 0.0;
      CHECK(d[static_cast<std::size_t>(n)] ==
            doctest::Approx(in_arr - out_arr + in_svc - out_svc).epsilon(1e-14));
    }
  }
}

TEST_CASE("mass conservation at random states") {
  SplitRng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const OdeState s1 = random_state(rng, 1, 5);
    CHECK(std::abs(sum_of(rhs_k1(s1, 0.7, 1.0))) <= 1e-12);
    CHECK(std::abs(sum_of(rhs_general(s1, 1, 0.7, 1.0))) <= 1e-12);
    const OdeState s2 = random_state(rng, 2, 3);
    CHECK(std::abs(sum_of(rhs_general(s2, 2, 0.6, 1.0))) <= 1e-12);
  }
}

TEST_CASE("permutation equivariance of the general drift") {
  SplitRng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const OdeState s = random_state(rng, 2, 3);
    const TupleBox& box = s.box;
    // rotate coordinates: (u0,u1,u2) -> (u1,u2,u0)
    std::vector<double> rotated(s.z.size());
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      const SuperNode u = box.decode(i);
      rotated[box.index(SuperNode{u[1], u[2], u[0]})] = s.z[i];
    }
    const OdeState sr(box, std::move(rotated));
    const std::vector<double> d = rhs_general(s, 2, 0.7, 1.0);
    const std::vector<double> dr = rhs_general(sr, 2, 0.7, 1.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const SuperNode u = box.decode(i);
      CHECK(dr[box.index(SuperNode{u[1], u[2], u[0]})] ==
            doctest::Approx(d[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("literal variant leaks mass") {
  const JsqSolution ref = jsq_stationary_law(1, 0.7, 1.0, 20);
  const OdeState p = OdeState::from_proportion(ref.law, 20);
  const std::vector<double> d = rhs_literal(p, 1, 0.7, 1.0);
  // no arrival outflow: the drift pumps probability in at every busy tuple
  CHECK(sum_of(d) > 0.1);
}

TEST_CASE("frozen trajectory without arrivals from the empty state") {
  OdeState z0(1, 4);
  const Trajectory tr = integrate(z0, 1, 0.0, 1.0, 5.0, 0.01);
  const OdeState& last = tr.samples.back();
  CHECK(last.z[last.box.index(SuperNode{0, 0})] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tr.diagnostics.clip_count == 0);
}

TEST_CASE("single-queue relaxation reaches the geometric law") {
  OdeState z0(0, 60);
  const Trajectory tr = integrate(z0, 0, 0.5, 1.0, 200.0, 0.01);
  const OdeState& last = tr.samples.back();
  const std::vector<double> oracle = testutil::geometric_balance_law(0.5, 1.0, 60);
  double worst = 0.0;
  for (int n = 0; n <= 60; ++n)
    worst = std::max(worst,
                     std::abs(last.z[static_cast<std::size_t>(n)] -
                              oracle[static_cast<std::size_t>(n)]));
  CHECK(worst <= 1e-6);
  CHECK(tr.diagnostics.max_mass_drift <= 1e-9);
  CHECK(tr.diagnostics.min_entry_seen >= -1e-9);
}

TEST_CASE("step halving agrees at the terminal state") {
  OdeState z0(1, 15);
  const Trajectory a = integrate(z0, 1, 0.7, 1.0, 10.0, 0.02);
  const Trajectory b = integrate(z0, 1, 0.7, 1.0, 10.0, 0.01);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.back().z.size(); ++i)
    worst = std::max(worst, std::abs(a.samples.back().z[i] - b.samples.back().z[i]));
  CHECK(worst <= 1e-8);
}

TEST_CASE("trajectory sampling covers start and end") {
  OdeState z0(1, 8);
  IntegrationOptions opts;
  opts.sample_interval = 1.0;
  const Trajectory tr = integrate(z0, 1, 0.7, 1.0, 5.0, 0.01, opts);
  REQUIRE(tr.samples.size() >= 2);
  CHECK(tr.samples.front().t == 0.0);
  CHECK(tr.samples.back().t == doctest::Approx(5.0));
  for (const OdeState& s : tr.samples) CHECK(std::abs(s.sum() - 1.0) <= 1e-9);
}

TEST_CASE("fixed point matches the reference law") {
  const FixedPointResult fp = fixed_point(1, 0.7, 1.0, 25);
  CHECK(fp.residual <= 1e-10);
  const JsqSolution ref = jsq_stationary_law(1, 0.7, 1.0, 25);
  const OdeState p = OdeState::from_proportion(ref.law, 25);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.z.size(); ++i)
    worst = std::max(worst, std::abs(p.z[i] - fp.state.z[i]));
  CHECK(worst <= 1e-7);
  CHECK(fp.boundary_mass <= 1e-6);
}

TEST_CASE("fixed point of the single queue is geometric") {
  const FixedPointResult fp = fixed_point(0, 0.5, 1.0, 60);
  const std::vector<double> oracle = testutil::geometric_balance_law(0.5, 1.0, 40);
  for (int n = 0; n <= 40; ++n)
    CHECK(std::abs(fp.state.z[static_cast<std::size_t>(n)] -
                   oracle[static_cast<std::size_t>(n)]) <= 1e-8);
}

TEST_CASE("fixed point is exchange symmetric") {
  const FixedPointResult fp = fixed_point(1, 0.6, 1.0, 12);
  const TupleBox& box = fp.state.box;
  for (int i = 0; i <= 12; ++i)
    for (int j = 0; j <= 12; ++j)
      CHECK(fp.state.z[box.index(SuperNode{i, j})] ==
            doctest::Approx(fp.state.z[box.index(SuperNode{j, i})]).epsilon(1e-10));
}

TEST_CASE("instability and validation errors") {
  CHECK_THROWS_AS(fixed_point(1, 1.0, 1.0, 10), InstabilityError);
  OdeState z0(1, 4);
  CHECK_THROWS_AS(integrate(z0, 1, 0.7, 1.0, 1.0, 0.0), ConfigError);
  OdeState bad(1, 4);
  bad.z[0] = 0.7;  // mass no longer sums to one
  CHECK_THROWS_AS(integrate(bad, 1, 0.7, 1.0, 1.0, 0.01), ConfigError);
}

TEST_CASE("proportion round-trip keeps mass in place") {
  SplitRng rng(23);
  const OdeState s = random_state(rng, 1, 6);
  const ProportionVector p = s.to_proportion();
  const OdeState back = OdeState::from_proportion(p, 6);
  for (std::size_t i = 0; i < s.z.size(); ++i)
    CHECK(back.z[i] == doctest::Approx(s.z[i]).epsilon(1e-15));
}
