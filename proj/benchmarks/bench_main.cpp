#include <random>

#include <benchmark/benchmark.h>

#include "powergraph/canon.hpp"
#include "powergraph/pgraph.hpp"
#include "powergraph/route.hpp"

using namespace pg;

namespace {

Matrix random_invertible(const FieldPtr& F, int n, std::mt19937_64& rng) {
  for (;;) {
    Matrix A(F, n);
    for (auto& x : A.a) x = rng() % F->q();
    if (is_invertible(A) && !A.is_scalar()) return A;
  }
}

void BM_FieldMul(benchmark::State& st) {
  auto F = Field::make(2, static_cast<unsigned>(st.range(0)));
  std::mt19937_64 rng(1);
  std::vector<fe> xs(1024);
  for (auto& x : xs) x = 1 + rng() % (F->q() - 1);
  fe acc = 1;
  for (auto _ : st) {
    for (fe x : xs) acc = F->mul(acc, x);
    benchmark::DoNotOptimize(acc);
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(xs.size()));
}
BENCHMARK(BM_FieldMul)->Arg(4)->Arg(8)->Arg(20);

void BM_MatPow(benchmark::State& st) {
  auto F = Field::make(3);
  std::mt19937_64 rng(2);
  Matrix A = random_invertible(F, static_cast<int>(st.range(0)), rng);
  for (auto _ : st) benchmark::DoNotOptimize(mat_pow(A, 1'000'003));
}
BENCHMARK(BM_MatPow)->Arg(3)->Arg(6)->Arg(8);

void BM_Gjcf(benchmark::State& st) {
  auto pp = prime_power(static_cast<u64>(st.range(1)));
  auto F = Field::make(pp->first, static_cast<unsigned>(pp->second));
  std::mt19937_64 rng(3);
  Matrix A = random_invertible(F, static_cast<int>(st.range(0)), rng);
  for (auto _ : st) benchmark::DoNotOptimize(gjcf(A));
}
BENCHMARK(BM_Gjcf)->Args({4, 3})->Args({6, 2})->Args({5, 4});

void BM_BuildGraph(benchmark::State& st) {
  GroupContext ctx{3, Field::make(3), st.range(0) ? Mode::PGL : Mode::GL_PROJ};
  for (auto _ : st) benchmark::DoNotOptimize(Graph::build(ctx).components().size());
}
BENCHMARK(BM_BuildGraph)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_ToPivotPath(benchmark::State& st) {
  int n = static_cast<int>(st.range(0));
  u64 q = static_cast<u64>(st.range(1));
  auto F = Field::make(q);
  std::mt19937_64 rng(4);
  std::vector<Matrix> xs;
  for (int i = 0; i < 64; ++i) xs.push_back(random_invertible(F, n, rng));
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(to_pivot_path(xs[i++ % xs.size()]).branch);
}
BENCHMARK(BM_ToPivotPath)->Args({4, 3})->Args({6, 2})->Args({4, 5})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
