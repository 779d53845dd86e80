#include "curv4/stability_solver.hpp"

#include <benchmark/benchmark.h>

using namespace curv4;

static void BM_RiemannAtPoint(benchmark::State& state) {
  const MetricField m = state.range(0) ? fubini_study() : twisted_metric(0.5, 0.3);
  const auto pts = random_points(m, 64, 1);
  std::size_t k = 0;
  for (auto _ : state) {
    const auto& p = pts[k++ % pts.size()];
    benchmark::DoNotOptimize(riemann_at(m, p.chart, p.x));
  }
}
BENCHMARK(BM_RiemannAtPoint)->Arg(0)->Arg(1);

static void BM_SectionalMinimum(benchmark::State& state) {
  const MetricField m = twisted_metric(0.5, 0.3);
  const auto c = riemann_at(m, 0, {0.2, -0.1, 0.4, 0.3});
  SectionalOptions opt;
  opt.starts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(min_sectional_curvature(c, opt));
}
BENCHMARK(BM_SectionalMinimum)->Arg(4)->Arg(16);

static void BM_ConditionCheckLattice(benchmark::State& state) {
  const MetricField m = product_spheres(1.0, 1.0);
  const auto grid = lattice_grid(m, 8);
  SectionalOptions opt;
  opt.enabled = false;
  for (auto _ : state) benchmark::DoNotOptimize(condition_check(m, grid, 1, nullptr, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_ConditionCheckLattice)->Unit(benchmark::kMillisecond);

static void BM_SampleSurface(benchmark::State& state) {
  const MetricField m = fubini_study();
  const SurfaceQuadrature quad{static_cast<int>(state.range(0)), 2 * static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(sample_surface(complex_line(), m, quad));
}
BENCHMARK(BM_SampleSurface)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

static void BM_AssembleIndexForm(benchmark::State& state) {
  const MetricField m = round_sphere4(1.0);
  const auto nodes = sample_surface(equator_s4(), m);
  const SectionBasis basis(equator_s4(), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_index_form(nodes, basis));
}
BENCHMARK(BM_AssembleIndexForm)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
