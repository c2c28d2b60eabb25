#include <benchmark/benchmark.h>

#include "shadowrt/filling.hpp"
#include "shadowrt/fsl_model.hpp"
#include "shadowrt/sixj.hpp"
#include "shadowrt/specfun.hpp"

using namespace shadowrt;

namespace {

FslPresentation single_block() {
  FslPresentation p;
  p.c = 1;
  p.n = 6;
  p.incidence = {{1, 2, 3, 4, 5, 6}};
  p.iota.assign(6, 0);
  p.framing.assign(6, 0);
  return p;
}

void bm_sixj(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  RootContext ctx(r);
  SixTuple t;
  t.m.fill(color_for_angle(r, 0.3));
  for (auto _ : state) benchmark::DoNotOptimize(sixj(ctx, t));
}
BENCHMARK(bm_sixj)->Arg(101)->Arg(1001)->Arg(10001);

void bm_sixj_via_ur(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  RootContext ctx(r);
  PhiGrid grid(ctx);
  SixTuple t;
  t.m.fill(color_for_angle(r, 0.3));
  for (auto _ : state) benchmark::DoNotOptimize(sixj_via_ur(grid, t));
}
BENCHMARK(bm_sixj_via_ur)->Arg(31)->Arg(101);

void bm_phi_r(benchmark::State& state) {
  RootContext ctx(static_cast<int>(state.range(0)));
  ContourSpec contour;
  for (auto _ : state) benchmark::DoNotOptimize(phi_r(ctx, contour, cplx(1.1, 0.05)));
}
BENCHMARK(bm_phi_r)->Arg(31)->Arg(301);

void bm_rt_filled(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  RootContext ctx(r);
  auto p = single_block();
  auto s = make_surgery(p, {1}, {{5, 3}});
  std::vector<int> nI{2};
  std::vector<int> mJ(5, 2);
  FilledOptions opt;
  opt.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(rt_filled(ctx, p, s, nI, mJ, opt));
}
BENCHMARK(bm_rt_filled)->Args({15, 1})->Args({31, 1})->Args({31, 4});

}  // namespace

BENCHMARK_MAIN();
