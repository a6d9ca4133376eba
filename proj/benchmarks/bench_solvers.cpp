#include <benchmark/benchmark.h>

#include "mflab/density.hpp"
#include "mflab/jsq.hpp"
#include "mflab/meanfield.hpp"

using namespace mflab;

namespace {

// Sparse stationary solve of the reference model as the cap grows.
void BM_ReferenceLawSolve(benchmark::State& state) {
  const int cap = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(jsq_stationary_law(1, 0.7, 1.0, cap));
  }
}
BENCHMARK(BM_ReferenceLawSolve)->Arg(20)->Arg(40)->Arg(80);

// One drift evaluation on a dense interior state.
void BM_DriftEval(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int cap = static_cast<int>(state.range(1));
  const FixedPointResult fp = fixed_point(k, 0.7, 1.0, cap, 1e-8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rhs_general(fp.state, k, 0.7, 1.0));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<long long>(fp.state.z.size()));
}
BENCHMARK(BM_DriftEval)->Args({1, 40})->Args({2, 12});

// One unit of simulated time with the fixed-step integrator.
void BM_IntegrateUnitTime(benchmark::State& state) {
  const OdeState z0(1, 40);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(z0, 1, 0.7, 1.0, 1.0, 0.01));
  }
}
BENCHMARK(BM_IntegrateUnitTime);

// Exact count-chain solve over the multiset state space.
void BM_ExactChainLaw(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int cap = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_stationary(n, 1, 0.3, 1.0, cap));
  }
}
BENCHMARK(BM_ExactChainLaw)->Args({3, 3})->Args({2, 8});

}  // namespace

BENCHMARK_MAIN();
