// Serial against OpenMP retrieval kernels, over KB sizes and dimensions.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "ttbys/embedding.hpp"
#include "ttbys/retrieval_kernels.hpp"

namespace {

using namespace ttbys;

struct Fixture {
  std::vector<double> a, b, qa, qb;
  std::vector<std::size_t> rows;
  std::vector<double> out;
  std::size_t dim;

  Fixture(std::size_t n, std::size_t d) : dim(d) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    const auto fill = [&](std::vector<double>& v, std::size_t count) {
      v.resize(count);
      for (auto& x : v) x = g(rng);
    };
    fill(a, n * d);
    fill(b, n * d);
    fill(qa, d);
    fill(qb, d);
    for (std::size_t i = 0; i < n; ++i) {
      l2_normalize(std::span<double>(a).subspan(i * d, d));
      l2_normalize(std::span<double>(b).subspan(i * d, d));
    }
    l2_normalize(qa);
    l2_normalize(qb);
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    out.resize(n);
  }
};

template <bool Parallel>
void BM_cosine(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const kernels::MatrixView m{f.a, f.dim};
  for (auto _ : state) {
    if constexpr (Parallel) kernels::cosine_scores_parallel(m, f.qa, f.rows, f.out);
    else kernels::cosine_scores_serial(m, f.qa, f.rows, f.out);
    benchmark::DoNotOptimize(f.out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = Parallel ? kernels::max_threads() : 1;
}

template <bool Parallel>
void BM_joint(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const kernels::MatrixView ma{f.a, f.dim}, mb{f.b, f.dim};
  for (auto _ : state) {
    if constexpr (Parallel) kernels::joint_scores_parallel(ma, f.qa, mb, f.qb, 0.5, f.rows, f.out);
    else kernels::joint_scores_serial(ma, f.qa, mb, f.qb, 0.5, f.rows, f.out);
    benchmark::DoNotOptimize(f.out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = Parallel ? kernels::max_threads() : 1;
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long n : {1'000L, 10'000L, 100'000L})
    for (long d : {256L, 384L}) b->Args({n, d});
}

BENCHMARK(BM_cosine<false>)->Name("cosine_scores/serial")->Apply(sizes);
BENCHMARK(BM_cosine<true>)->Name("cosine_scores/openmp")->Apply(sizes);
BENCHMARK(BM_joint<false>)->Name("joint_scores/serial")->Apply(sizes);
BENCHMARK(BM_joint<true>)->Name("joint_scores/openmp")->Apply(sizes);

}  // namespace

BENCHMARK_MAIN();
