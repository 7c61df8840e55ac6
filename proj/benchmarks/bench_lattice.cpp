#include <benchmark/benchmark.h>

#include "tailcluster/field.hpp"
#include "tailcluster/lattice.hpp"

namespace {

using namespace tailcluster;

const LatticeSpec& skewed() {
  static const LatticeSpec l = LatticeSpec::parse("3,1;0,4");
  return l;
}

void BM_Contains(benchmark::State& state) {
  const auto& l = skewed();
  GridPoint p{0, 0};
  for (auto _ : state) {
    p[0] = (p[0] + 7) % 1000;
    p[1] = (p[1] + 3) % 1000;
    benchmark::DoNotOptimize(l.contains(p));
  }
}

void BM_CosetRepresentatives(benchmark::State& state) {
  const Coord k = state.range(0);
  const LatticeSpec l(IntMatrix(2, {k, 1, 0, k}));
  for (auto _ : state) benchmark::DoNotOptimize(l.coset_representatives());
}

void BM_LatticeMask(benchmark::State& state) {
  const Window w = Window::cube(2, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lattice_mask(w, skewed()));
}

void BM_SumAlpha(benchmark::State& state) {
  const Window w = Window::cube(2, state.range(0));
  FieldSample f(w, 1);
  for (std::size_t i = 0; i < f.size(); ++i) f.value(i)[0] = 1.0 / static_cast<double>(i + 1);
  const LatticeFunctionals fn(w, skewed());
  const PathNorms p = PathNorms::of(f);
  for (auto _ : state) benchmark::DoNotOptimize(fn.sum_alpha(p, 1.5));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.size()));
}

BENCHMARK(BM_Contains);
BENCHMARK(BM_CosetRepresentatives)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(BM_LatticeMask)->Arg(16)->Arg(64);
BENCHMARK(BM_SumAlpha)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
