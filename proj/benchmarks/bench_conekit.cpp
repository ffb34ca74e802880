#include <benchmark/benchmark.h>

#include <random>

#include "conekit/families.hpp"
#include "conekit/generators.hpp"
#include "conekit/qualconds.hpp"
#include "examples.hpp"
#include "support.hpp"

using namespace conekit;
using namespace conekit::testing;

// Hull of the generators (1, i) for i = 0..K.
static void BM_DoubleDescription(benchmark::State& state) {
  Mat g;
  for (long i = 0; i <= state.range(0); ++i) g.push_back({1, Q(i)});
  for (auto _ : state) benchmark::DoNotOptimize(dd_convert(ConvexPolyCone::from_generators(2, g)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DoubleDescription)->RangeMultiplier(4)->Range(8, 512)->Complexity();

static void BM_PolarRandom3D(benchmark::State& state) {
  std::mt19937 rng(7);
  std::vector<ConvexPolyCone> cones;
  for (int k = 0; k < 32; ++k) cones.push_back(random_cone(rng, 3, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state)
    for (const auto& c : cones) benchmark::DoNotOptimize(polar(c));
}
BENCHMARK(BM_PolarRandom3D)->Arg(3)->Arg(6)->Arg(10);

static void BM_ChipTwoParabolas(benchmark::State& state) {
  auto f = two_parabolas();
  for (auto _ : state) benchmark::DoNotOptimize(chip_check(*f, Vec{0, 0}));
}
BENCHMARK(BM_ChipTwoParabolas);

static void BM_ChipSteepeningEpigraphs(benchmark::State& state) {
  auto f = steepening_epigraphs();
  for (auto _ : state) benchmark::DoNotOptimize(chip_check(*f, Vec{0, 0}));
}
BENCHMARK(BM_ChipSteepeningEpigraphs)->Unit(benchmark::kMillisecond);

static void BM_ClosedHullHalfplanes(benchmark::State& state) {
  auto f = halfplane_family(0);
  auto g = normal_generators(*f, Vec{0, 0});
  TruncationPolicy p{8, static_cast<long>(state.range(0)), 5};
  for (auto _ : state) benchmark::DoNotOptimize(closed_hull(*g, p));
}
BENCHMARK(BM_ClosedHullHalfplanes)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_FmcqLinearFamily(benchmark::State& state) {
  auto f = linear_family();
  for (auto _ : state) benchmark::DoNotOptimize(fmcq_check(*f));
}
BENCHMARK(BM_FmcqLinearFamily)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
