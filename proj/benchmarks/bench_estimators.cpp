#include <benchmark/benchmark.h>

#include "tailcluster/extremal.hpp"
#include "tailcluster/models.hpp"

namespace {

using namespace tailcluster;

FieldSampler ar1_sampler() {
  ModelSpec m;
  m.kind = ModelKind::ar1_tail_chain;
  return FieldSampler(m, Window::cube(1, 32));
}

EstimatorOptions opts(const benchmark::State& state) {
  EstimatorOptions o;
  o.seed = 5;
  o.n = static_cast<std::size_t>(state.range(0));
  o.parallel.threads = static_cast<unsigned>(state.range(1));
  return o;
}

const LatticeSpec kAmbient = LatticeSpec::ambient(1);

void BM_Samorodnitsky(benchmark::State& state) {
  const auto sampler = ar1_sampler();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_samorodnitsky(sampler, kAmbient, opts(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Berman(benchmark::State& state) {
  const auto sampler = ar1_sampler();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_berman(sampler, kAmbient, 0.0, opts(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Albin(benchmark::State& state) {
  const auto sampler = ar1_sampler();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_albin(sampler, kAmbient, 1.0, opts(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ClusterSup(benchmark::State& state) {
  const auto sampler = ar1_sampler();
  ClusterConstructionSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_cluster_sup(spec, sampler, opts(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void threads(benchmark::internal::Benchmark* b) {
  for (long t : {1, 2, 4}) b->Args({20000, t});
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

BENCHMARK(BM_Samorodnitsky)->Apply(threads);
BENCHMARK(BM_Berman)->Apply(threads);
BENCHMARK(BM_Albin)->Apply(threads);
BENCHMARK(BM_ClusterSup)->Apply(threads);

}  // namespace

BENCHMARK_MAIN();
