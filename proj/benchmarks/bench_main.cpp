#include <benchmark/benchmark.h>

#include "dwt/laplace.hpp"
#include "dwt/streamline.hpp"
#include "support.hpp"

namespace {

using namespace dwt;

BinaryMask ring(int size) {
  const double c = size / 2.0;
  return test::annulus(size, c, c, size * 0.2, size * 0.35);
}

void BM_SolveLaplace(benchmark::State& state) {
  const RegionLabels r = label_regions(ring(static_cast<int>(state.range(0))));
  const BoundaryConditions bc = extract_boundaries(r);
  for (auto _ : state) benchmark::DoNotOptimize(solve_laplace(r, bc, SolverConfig{}));
}
BENCHMARK(BM_SolveLaplace)->Arg(64)->Arg(128)->Arg(192)->Unit(benchmark::kMillisecond);

void BM_Measure(benchmark::State& state) {
  const BinaryMask m = ring(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(measure(m, SolverConfig{}));
}
BENCHMARK(BM_Measure)->Arg(80)->Arg(192)->Unit(benchmark::kMillisecond);

// Fill with only every fourth splatted pixel kept.
void BM_FillMissing(benchmark::State& state) {
  const BinaryMask m = ring(static_cast<int>(state.range(0)));
  const MeasureResult full = measure_detailed(m, SolverConfig{});
  ThicknessMap sparse = full.thickness;
  for (std::size_t i = 0; i < sparse.thickness.size(); ++i) {
    if (i % 4 != 0) {
      sparse.thickness[i] = 0.0;
      sparse.assigned[i] = Assignment::zero;
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(fill_missing(sparse, full.potential, SolverConfig{}));
}
BENCHMARK(BM_FillMissing)->Arg(80)->Arg(192)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
