#include <doctest.h>

#include <vector>

#include "mflab/ctmc.hpp"
#include "mflab/errors.hpp"

using namespace mflab;

TEST_CASE("two-state chain via detailed balance") {
  // Q = [[-1, 1], [2, -2]] has stationary law (2/3, 1/3)
  SparseGenerator g(2);
  g.add_rate(0, 1, 1.0);
  g.add_rate(1, 0, 2.0);
  const std::vector<double> pi = stationary_distribution(g);
  CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(g.residual(pi) <= 1e-12);
}

TEST_CASE("generator bookkeeping") {
  SparseGenerator g(3);
  g.add_rate(0, 1, 0.5);
  g.add_rate(0, 2, 1.5);
  g.add_rate(2, 0, 4.0);
  g.add_rate(1, 1, 9.0);  // self-loop ignored
  g.add_rate(1, 2, 0.0);  // zero rate ignored
  CHECK(g.nnz() == 3);
  CHECK(g.out_rate(0) == doctest::Approx(2.0));
  CHECK(g.out_rate(1) == 0.0);
  CHECK(g.max_out_rate() == doctest::Approx(4.0));
  CHECK_THROWS_AS(g.add_rate(0, 1, -1.0), StructuralError);
}

TEST_CASE("reducible chain is rejected") {
  // two disconnected 2-cycles: pi Q = 0 has a two-dimensional solution space
  SparseGenerator g(4);
  g.add_rate(0, 1, 1.0);
  g.add_rate(1, 0, 1.0);
  g.add_rate(2, 3, 1.0);
  g.add_rate(3, 2, 1.0);
  CHECK_THROWS_AS(stationary_distribution(g), StructuralError);
}

TEST_CASE("single state chain") {
  SparseGenerator g(1);
  const std::vector<double> pi = stationary_distribution(g);
  REQUIRE(pi.size() == 1);
  CHECK(pi[0] == 1.0);
}

TEST_CASE("birth-death ladder solves to the balance recursion") {
  const int cap = 30;
  const double lambda = 0.6, mu = 1.0;
  SparseGenerator g(static_cast<std::size_t>(cap) + 1);
  for (int n = 0; n < cap; ++n) {
    g.add_rate(static_cast<std::size_t>(n), static_cast<std::size_t>(n) + 1, lambda);
    g.add_rate(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(n), mu);
  }
  const std::vector<double> pi = stationary_distribution(g);
  // independent recursion: pi_{n+1} = pi_n * lambda / mu, normalized on the box
  double expect = 1.0, total = 1.0;
  std::vector<double> ref{1.0};
  for (int n = 0; n < cap; ++n) {
    expect *= lambda / mu;
    ref.push_back(expect);
    total += expect;
  }
  for (int n = 0; n <= cap; ++n)
    CHECK(pi[static_cast<std::size_t>(n)] ==
          doctest::Approx(ref[static_cast<std::size_t>(n)] / total).epsilon(1e-12));
}
