#include <random>

#include <benchmark/benchmark.h>

#include "projbal/bergman.hpp"
#include "projbal/fibercalc.hpp"
#include "projbal/sympower.hpp"

using namespace projbal;

namespace {

CMat random_metric(int r, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMat b(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) b(i, j) = cd(g(rng), g(rng)) * 0.5;
  return b.adjoint() * b + CMat::Identity(r, r);
}

void BM_Permanent(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  CMat m = random_metric(n, 1);
  for (auto _ : st) benchmark::DoNotOptimize(detail::permanent(m));
}
BENCHMARK(BM_Permanent)->DenseRange(2, 8, 2);

void BM_SymMetric(benchmark::State& st) {
  CMat h = random_metric(3, 2);
  const int d = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(sym_metric(h, d));
}
BENCHMARK(BM_SymMetric)->DenseRange(1, 3);

void BM_TOperator(benchmark::State& st) {
  const int r = static_cast<int>(st.range(0)), d = static_cast<int>(st.range(1));
  CMat h = random_metric(r, 3);
  for (auto _ : st) benchmark::DoNotOptimize(t_operator(h, d));
}
BENCHMARK(BM_TOperator)->Args({2, 2})->Args({2, 3})->Args({3, 2})->Unit(benchmark::kMillisecond);

void BM_Gram(benchmark::State& st) {
  const int k = static_cast<int>(st.range(0));
  SplitBundleModel E{{LineBundleMetricModel{1, {}}, LineBundleMetricModel{1, {}}}};
  BaseKahler base{Poly{{0.0, 0.3, -0.2, 0.1}}};
  auto basis = section_basis(E, 2, k);
  auto metric = metric_h_of_k(E, base, 2, k);
  for (auto _ : st) benchmark::DoNotOptimize(gram(basis, metric, "h(k)", base));
}
BENCHMARK(BM_Gram)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HattedPairing(benchmark::State& st) {
  const int r = static_cast<int>(st.range(0)), d = 2;
  const int R = static_cast<int>(sym_dim(r, d));
  CMat H = random_metric(R, 4);
  for (auto _ : st) benchmark::DoNotOptimize(hatted_pairing(H, r, d));
}
BENCHMARK(BM_HattedPairing)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
