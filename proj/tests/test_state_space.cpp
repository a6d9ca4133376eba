#include <doctest.h>

#include <cmath>
#include <set>

#include "mflab/box.hpp"
#include "mflab/errors.hpp"
#include "mflab/proportion.hpp"
#include "mflab/rng.hpp"
#include "mflab/supernode.hpp"
#include "test_util.hpp"

using namespace mflab;

TEST_CASE("supernode label and parse round-trip") {
  const SuperNode u{0, 3, 1};
  CHECK(u.label() == "0,3,1");
  CHECK(SuperNode::parse("0,3,1") == u);
  CHECK(SuperNode::parse("7") == SuperNode{7});
  CHECK_THROWS_AS(SuperNode::parse(""), ConfigError);
  CHECK_THROWS_AS(SuperNode::parse("1,,2"), ConfigError);
  CHECK_THROWS_AS(SuperNode::parse("1,x"), ConfigError);
  CHECK_THROWS_AS(SuperNode::parse("-1,2"), ConfigError);
}

TEST_CASE("supernode argmin and shifted") {
  const SuperNode u{2, 0, 0, 5};
  CHECK(u.min_value() == 0);
  CHECK(u.argmin() == std::vector<int>{1, 2});
  CHECK(u.shifted(0, -1) == SuperNode{1, 0, 0, 5});
  CHECK(u.shifted(3, +1) == SuperNode{2, 0, 0, 6});
}

TEST_CASE("tuple box index/decode bijection, last coordinate fastest") {
  const TupleBox box(3, 4);
  CHECK(box.size() == 125);
  CHECK(box.index(SuperNode{0, 0, 0}) == 0);
  CHECK(box.index(SuperNode{0, 0, 1}) == 1);  // last coordinate increments first
  CHECK(box.index(SuperNode{0, 1, 0}) == 5);
  for (std::size_t i = 0; i < box.size(); ++i) {
    const SuperNode u = box.decode(i);
    CHECK(box.contains(u));
    CHECK(box.index(u) == i);
  }
  CHECK_FALSE(box.contains(SuperNode{0, 0}));
  CHECK_FALSE(box.contains(SuperNode{0, 0, 5}));
  CHECK_THROWS_AS(TupleBox(0, 4), ConfigError);
  CHECK_THROWS_AS(TupleBox(9, 5000), ConfigError);  // exceeds the 2^32 guard
}

TEST_CASE("membership validation") {
  ProportionVector z(1, {{SuperNode{0, 0}, 1.0}});
  CHECK(validate_membership(z, 4));

  ProportionVector bad_div(1, {{SuperNode{0, 0}, 0.3}, {SuperNode{1, 0}, 0.7}});
  CHECK(validate_membership(bad_div));
  CHECK_FALSE(validate_membership(bad_div, 4));  // 4*0.3 is not an integer

  ProportionVector bad_sum(1, {{SuperNode{0, 0}, 0.5}, {SuperNode{0, 1}, 0.6}});
  CHECK_FALSE(validate_membership(bad_sum));

  ProportionVector negative(1, {{SuperNode{0, 0}, -0.1}, {SuperNode{0, 1}, 1.1}});
  CHECK_FALSE(validate_membership(negative));
}

TEST_CASE("rho distance basics") {
  ProportionVector z(1, {{SuperNode{0, 0}, 0.5}, {SuperNode{0, 1}, 0.5}});
  CHECK(rho_distance(z, z) == 0.0);

  ProportionVector zp(1, {{SuperNode{0, 0}, 0.5}, {SuperNode{0, 1}, 0.3}});
  // single differing entry at (0,1): |0.2| / (1+1)
  CHECK(rho_distance(z, zp) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(rho_distance(zp, z) == rho_distance(z, zp));

  ProportionVector a(1, {{SuperNode{0, 0}, 1.0}});
  ProportionVector b(1, {{SuperNode{3, 0}, 1.0}});
  CHECK(rho_distance(a, b) == doctest::Approx(1.0));  // divisor uses the last coordinate

  ProportionVector other_k(2, {{SuperNode{0, 0, 0}, 1.0}});
  CHECK_THROWS_AS(rho_distance(a, other_k), DimensionError);
}

TEST_CASE("total variation and max-abs basics") {
  ProportionVector a(1, {{SuperNode{0, 0}, 1.0}});
  ProportionVector b(1, {{SuperNode{1, 1}, 1.0}});
  CHECK(total_variation(a, a) == 0.0);
  CHECK(total_variation(a, b) == doctest::Approx(1.0));

  ProportionVector c(1, {{SuperNode{0, 0}, 0.5}, {SuperNode{0, 1}, 0.5}});
  CHECK(total_variation(c, a) == doctest::Approx(0.5));
  CHECK(max_abs_difference(c, a) == doctest::Approx(0.5));
  CHECK_THROWS_AS(total_variation(a, ProportionVector(2, {})), DimensionError);
}

TEST_CASE("metric axioms on random triples") {
  SplitRng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = testutil::random_proportion(rng, 1, 6, 8);
    const auto b = testutil::random_proportion(rng, 1, 6, 8);
    const auto c = testutil::random_proportion(rng, 1, 6, 8);
    const double ab = rho_distance(a, b);
    const double bc = rho_distance(b, c);
    const double ac = rho_distance(a, c);
    CHECK(ab >= 0.0);
    CHECK(ab == rho_distance(b, a));
    CHECK(ac <= ab + bc + 1e-15);
    if (ab == 0.0) CHECK(max_abs_difference(a, b) == 0.0);
    // rho <= sup|delta| <= 2 TV on finitely supported vectors
    const double sup = max_abs_difference(a, b);
    CHECK(ab <= sup + 1e-15);
    CHECK(sup <= 2.0 * total_variation(a, b) + 1e-15);
  }
}

TEST_CASE("tail bound: agreement below l forces rho <= 1/(l+1)") {
  SplitRng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int l = 1 + static_cast<int>(rng.uniform_below(9));
    // agree on every tuple with last coordinate <= l, differ arbitrarily above
    ProportionVector::Map ma, mb;
    for (int s = 0; s < 6; ++s) {
      const int i = static_cast<int>(rng.uniform_below(4));
      const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(l + 1)));
      const double shared = rng.uniform01();
      ma[SuperNode{i, j}] = shared;
      mb[SuperNode{i, j}] = shared;
    }
    for (int s = 0; s < 6; ++s) {
      const int i = static_cast<int>(rng.uniform_below(4));
      const int j = l + 1 + static_cast<int>(rng.uniform_below(8));
      ma[SuperNode{i, j}] = rng.uniform01();
      mb[SuperNode{i, j}] = rng.uniform01();
    }
    const ProportionVector a(1, std::move(ma));
    const ProportionVector b(1, std::move(mb));
    CHECK(rho_distance(a, b) <= 1.0 / (l + 1) + 1e-15);
  }
}

TEST_CASE("json round-trip") {
  ProportionVector z(1, {{SuperNode{0, 0}, 0.25}, {SuperNode{2, 5}, 0.75}});
  const ProportionVector back = ProportionVector::from_json_string(z.to_json_string());
  CHECK(back.k() == 1);
  CHECK(back.entries() == z.entries());
  CHECK_THROWS_AS(ProportionVector::from_json_string("[1,2]"), ConfigError);
}

TEST_CASE("rng determinism and stream separation") {
  SplitRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == b.uniform01());

  SplitRng s0 = SplitRng::stream(42, 0);
  SplitRng s1 = SplitRng::stream(42, 1);
  int agree = 0;
  for (int i = 0; i < 64; ++i)
    if (s0.uniform_below(2) == s1.uniform_below(2)) ++agree;
  CHECK(agree < 55);  // streams decorrelated

  SplitRng c(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.exponential(2.0) >= 0.0);
    CHECK(c.uniform_below(7) < 7);
  }
}
