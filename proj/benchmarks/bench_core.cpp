#include <benchmark/benchmark.h>

#include "warpflow/assumptions.hpp"
#include "warpflow/control.hpp"
#include "warpflow/flow.hpp"
#include "warpflow/geometry.hpp"

namespace {

warpflow::Example canonical(std::size_t n) { return warpflow::build_canonical_example(2.0, 0.1, 2, {n, 1000.0, 2.0}); }

void BM_Rhs(benchmark::State& st) {
  const auto ex = canonical(std::size_t(st.range(0)));
  warpflow::Rhs out;
  for (auto _ : st) {
    warpflow::rhs(ex.spec, ex.state, warpflow::BoundaryMode::asymptotic_dirichlet, out);
    benchmark::DoNotOptimize(out);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Rhs)->Arg(513)->Arg(2049)->Arg(4097);

void BM_Step(benchmark::State& st) {
  const auto ex = canonical(std::size_t(st.range(0)));
  warpflow::IntegratorConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(warpflow::step(ex.spec, ex.state, cfg));
}
BENCHMARK(BM_Step)->Arg(513)->Arg(2049);

void BM_RiemannField(benchmark::State& st) {
  const auto ex = canonical(std::size_t(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(warpflow::riemann_field(ex.spec, ex.state));
}
BENCHMARK(BM_RiemannField)->Arg(2049);

void BM_Polyd(benchmark::State& st) {
  const auto g = warpflow::cubic_over_1ps();
  for (auto _ : st) benchmark::DoNotOptimize(warpflow::polyd(g));
}
BENCHMARK(BM_Polyd);

void BM_CanonicalRun(benchmark::State& st) {
  const auto ex = canonical(std::size_t(st.range(0)));
  warpflow::IntegratorConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(warpflow::run(ex.spec, ex.state, cfg, ex.grid.r));
}
BENCHMARK(BM_CanonicalRun)->Arg(513)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
