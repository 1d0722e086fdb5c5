// Serial reference kernels vs their OpenMP counterparts.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "grtt/kernels.hpp"

using namespace grtt;

namespace {

Matrix random_points(Index dim, Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(dim, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < dim; ++i) m(i, j) = u(rng);
  return m;
}

template <Matrix (*Fn)(const Matrix&)>
void BM_PairwiseDistances(benchmark::State& state) {
  const Matrix pts = random_points(784, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <void (*Fn)(const Matrix&, const Matrix&, std::span<Index>, std::span<double>)>
void BM_AssignNearest(benchmark::State& state) {
  const Matrix pts = random_points(64, state.range(0), 2);
  const Matrix cen = random_points(64, 10, 3);
  std::vector<Index> labels(static_cast<std::size_t>(pts.cols()));
  std::vector<double> d2(labels.size());
  for (auto _ : state) {
    Fn(pts, cen, labels, d2);
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <void (*Fn)(std::span<const double>, std::span<const Index>, std::span<const Index>, std::span<double>)>
void BM_PermuteCopy(benchmark::State& state) {
  const Index s = state.range(0);
  const Index shape[] = {4, 7, 4, 7, s};
  const Index perm[] = {0, 1, 4, 2, 3};
  const Matrix in = random_points(784, s, 4);
  std::vector<double> out(static_cast<std::size_t>(in.size()));
  for (auto _ : state) {
    Fn(std::span<const double>(in.data(), static_cast<std::size_t>(in.size())), std::span<const Index>(shape), std::span<const Index>(perm),
       std::span<double>(out));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * in.size() * static_cast<Index>(sizeof(double)));
}

}  // namespace

BENCHMARK(BM_PairwiseDistances<kernels::serial::pairwise_sq_distances>)->Name("pairwise_sq_distances/serial")->Arg(100)->Arg(500);
BENCHMARK(BM_PairwiseDistances<kernels::omp::pairwise_sq_distances>)->Name("pairwise_sq_distances/omp")->Arg(100)->Arg(500);
BENCHMARK(BM_AssignNearest<kernels::serial::assign_nearest>)->Name("assign_nearest/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_AssignNearest<kernels::omp::assign_nearest>)->Name("assign_nearest/omp")->Arg(1000)->Arg(10000);
BENCHMARK(BM_PermuteCopy<kernels::serial::permute_copy>)->Name("permute_copy/serial")->Arg(60)->Arg(500);
BENCHMARK(BM_PermuteCopy<kernels::omp::permute_copy>)->Name("permute_copy/omp")->Arg(60)->Arg(500);

BENCHMARK_MAIN();
