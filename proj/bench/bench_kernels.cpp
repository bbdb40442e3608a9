// Compares the OpenMP kernels against their serial counterparts: the
// prefix-hash packing pass vs the quadratic reference, and the parallel
// sampling / mean-width loops at one thread vs all threads.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "ergofit/complexity.hpp"
#include "ergofit/families.hpp"
#include "ergofit/meanwidth.hpp"
#include "ergofit/rng.hpp"

using namespace ergofit;

namespace {

SequenceSample logistic_sample(int entries, int n) {
  auto fam = make_logistic(4.0, 4.0);
  std::vector<State> xs;
  for (int i = 0; i < entries; ++i) xs.push_back({(i + 0.5) / entries});
  return sample_sequences(fam, {{4.0}}, xs, n);
}

void BM_greedy_packing(benchmark::State& state) {
  auto s = logistic_sample(static_cast<int>(state.range(0)), 16);
  for (auto _ : state)
    benchmark::DoNotOptimize(greedy_packing(s, 0.05, kPInf).count);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_greedy_packing)->Arg(2000)->Arg(8000)->Arg(32000)->Complexity();

void BM_greedy_packing_ref(benchmark::State& state) {
  auto s = logistic_sample(static_cast<int>(state.range(0)), 16);
  for (auto _ : state)
    benchmark::DoNotOptimize(greedy_packing_ref(s, 0.05, kPInf).count);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_greedy_packing_ref)->Arg(2000)->Arg(8000)->Arg(32000)->Complexity();

void set_threads(int arg) { omp_set_num_threads(arg > 0 ? arg : omp_get_num_procs()); }

void BM_sample_sequences(benchmark::State& state) {
  set_threads(static_cast<int>(state.range(0)));
  auto fam = make_logistic(0.0, 4.0);
  std::vector<Theta> thetas;
  for (int i = 0; i < 256; ++i) thetas.push_back({4.0 * i / 255});
  std::vector<State> xs;
  for (int i = 0; i < 64; ++i) xs.push_back({(i + 0.5) / 64});
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_sequences(fam, thetas, xs, 256).values.size());
}
BENCHMARK(BM_sample_sequences)->Arg(1)->Arg(0)->ArgName("threads");

void BM_mean_width_n(benchmark::State& state) {
  set_threads(static_cast<int>(state.range(0)));
  auto fam = make_logistic(0.0, 3.5);
  NoiseModel g;
  OptimizerConfig opt;
  opt.grid_points = 17;
  opt.refine_rounds = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(mean_width_n(fam, g, 64, 16, opt, 1).kappa_over_n);
}
BENCHMARK(BM_mean_width_n)->Arg(1)->Arg(0)->ArgName("threads");

}  // namespace

BENCHMARK_MAIN();
