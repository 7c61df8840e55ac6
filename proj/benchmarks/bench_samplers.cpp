#include <benchmark/benchmark.h>

#include "tailcluster/cluster.hpp"
#include "tailcluster/models.hpp"
#include "tailcluster/random.hpp"

namespace {

using namespace tailcluster;

ModelSpec make(ModelKind kind) {
  ModelSpec m;
  m.kind = kind;
  if (kind == ModelKind::moving_max) m.coeffs = {{2.0}, {1.0}};
  return m;
}

void BM_SampleTheta(benchmark::State& state, ModelKind kind) {
  const FieldSampler sampler(make(kind), Window::cube(1, state.range(0)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    RandomStream stream(1, i++);
    benchmark::DoNotOptimize(sampler.sample_Theta(stream));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_SampleZ(benchmark::State& state, ModelKind kind) {
  const FieldSampler sampler(make(kind), Window::cube(1, state.range(0)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    RandomStream stream(2, i++);
    benchmark::DoNotOptimize(sampler.sample_Z(stream));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_BrownResnickSetup(benchmark::State& state) {
  for (auto _ : state) {
    FieldSampler sampler(make(ModelKind::brown_resnick), Window::cube(1, state.range(0)));
    benchmark::DoNotOptimize(sampler.jitter_used());
  }
}

void BM_ConstructQ(benchmark::State& state) {
  const auto method = all_cluster_methods()[static_cast<std::size_t>(state.range(0))];
  const FieldSampler sampler(make(ModelKind::ar1_tail_chain), Window::cube(1, 32));
  ClusterConstructionSpec spec;
  spec.method = method;
  const ClusterBuilder builder(spec, sampler);
  std::uint64_t i = 0;
  for (auto _ : state) {
    RandomStream stream(3, i++);
    benchmark::DoNotOptimize(builder.draw(stream));
  }
  state.SetLabel(std::string(to_string(method)));
}

BENCHMARK_CAPTURE(BM_SampleTheta, ar1, ModelKind::ar1_tail_chain)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK_CAPTURE(BM_SampleTheta, moving_max, ModelKind::moving_max)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK_CAPTURE(BM_SampleTheta, brown_resnick, ModelKind::brown_resnick)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK_CAPTURE(BM_SampleZ, brown_resnick, ModelKind::brown_resnick)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_BrownResnickSetup)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConstructQ)->DenseRange(0, 6);

}  // namespace

BENCHMARK_MAIN();
