// Serial reference vs OpenMP kernels on the hot inner loops.

#include <benchmark/benchmark.h>

#include "tubelink/kernels.hpp"

using namespace tubelink;

namespace {

std::vector<Vec> random_vectors(int n, int d, uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> out(n, Vec(d));
  for (auto& v : out)
    for (double& x : v) x = rng.gaussian();
  return out;
}

std::vector<BoxMap> random_tubes(int n, int frames, uint64_t seed) {
  Rng rng(seed);
  std::vector<BoxMap> out(n);
  for (auto& m : out)
    for (int t = 0; t < frames; ++t) {
      const double x = rng.uniform(0, 500), y = rng.uniform(0, 300);
      m[t] = {x, y, x + rng.uniform(5, 60), y + rng.uniform(5, 60)};
    }
  return out;
}

void bm_encode_serial(benchmark::State& state) {
  EncoderParams p = init_encoder(64, 64, 32, 1);
  auto q = random_vectors(static_cast<int>(state.range(0)), 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::encode_batch(p, q));
}

void bm_encode_parallel(benchmark::State& state) {
  EncoderParams p = init_encoder(64, 64, 32, 1);
  auto q = random_vectors(static_cast<int>(state.range(0)), 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::encode_batch(p, q));
}

void bm_cosine_serial(benchmark::State& state) {
  auto a = random_vectors(static_cast<int>(state.range(0)), 32, 3);
  auto b = random_vectors(static_cast<int>(state.range(0)), 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::pairwise_cosine(a, b));
}

void bm_cosine_parallel(benchmark::State& state) {
  auto a = random_vectors(static_cast<int>(state.range(0)), 32, 3);
  auto b = random_vectors(static_cast<int>(state.range(0)), 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_cosine(a, b));
}

void bm_tube_iou_serial(benchmark::State& state) {
  auto a = random_tubes(static_cast<int>(state.range(0)), 20, 5);
  auto b = random_tubes(static_cast<int>(state.range(0)), 20, 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::reference::tube_iou_matrix(a, b, FrameSet::Union));
}

void bm_tube_iou_parallel(benchmark::State& state) {
  auto a = random_tubes(static_cast<int>(state.range(0)), 20, 5);
  auto b = random_tubes(static_cast<int>(state.range(0)), 20, 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::tube_iou_matrix(a, b, FrameSet::Union));
}

}  // namespace

BENCHMARK(bm_encode_serial)->Arg(256)->Arg(2048);
BENCHMARK(bm_encode_parallel)->Arg(256)->Arg(2048);
BENCHMARK(bm_cosine_serial)->Arg(64)->Arg(256);
BENCHMARK(bm_cosine_parallel)->Arg(64)->Arg(256);
BENCHMARK(bm_tube_iou_serial)->Arg(32)->Arg(128);
BENCHMARK(bm_tube_iou_parallel)->Arg(32)->Arg(128);

BENCHMARK_MAIN();
