#include <benchmark/benchmark.h>

#include "mflab/density.hpp"
#include "mflab/ring.hpp"

using namespace mflab;

namespace {

RingConfig ring_config(int n) {
  RingConfig cfg;
  cfg.n_nodes = n;
  cfg.k_neighbors = 1;
  cfg.lambda = 0.7;
  cfg.mu = 1.0;
  cfg.seed = 12345;
  return cfg;
}

// Event throughput of the ring simulator at steady state. Each iteration
// advances by a time slice sized so the event count per iteration stays
// roughly constant across ring sizes.
void BM_RingEvents(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RingSimulator sim(ring_config(n));
  sim.advance_to(50.0);  // past the transient
  double t = sim.state().clock;
  const double slice = 2000.0 / n;
  long long events = 0;
  for (auto _ : state) {
    t += slice;
    sim.advance_to(t, [&](double, const NetworkState&) { ++events; });
  }
  state.SetItemsProcessed(events);
}
BENCHMARK(BM_RingEvents)->Arg(64)->Arg(256)->Arg(1024);

// Cost of folding a network snapshot into the tuple proportion map.
void BM_ProportionSnapshot(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RingSimulator sim(ring_config(n));
  sim.advance_to(50.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_proportion(sim.state(), 1));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ProportionSnapshot)->Arg(64)->Arg(1024);

// Count-chain analogue at matching size, for simulator-vs-simulator reading.
void BM_ChainEvents(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CountVector start;
  start.n = n;
  start.counts[SuperNode{0, 0}] = n;
  const double slice = 2000.0 / n;
  long long events = 0;
  std::uint64_t round = 0;
  for (auto _ : state) {
    gillespie_simulate(start, 1, 0.7, 1.0, slice, 900 + round++,
                       [&](double, const CountVector&) { ++events; });
  }
  state.SetItemsProcessed(events);
}
BENCHMARK(BM_ChainEvents)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
