#include <benchmark/benchmark.h>

#include <random>

#include "sigsparse/dictlearn.hpp"
#include "sigsparse/imageproc.hpp"
#include "sigsparse/sparse.hpp"
#include "sigsparse/synth.hpp"

using namespace sigsparse;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  return M;
}

Dictionary unit_dictionary(int n, int K, std::uint64_t seed) {
  Eigen::MatrixXd D = gaussian(n, K, seed);
  D.colwise().normalize();
  return Dictionary(D);
}

void BM_OmpBatch(benchmark::State& state) {
  const auto D = unit_dictionary(25, 60, 1);
  const Eigen::MatrixXd X = gaussian(25, static_cast<int>(state.range(0)), 2);
  OmpOptions o;
  o.batch = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(omp_encode(D, X, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OmpBatch)->Args({2000, 1})->Args({2000, 0});

void BM_LarsLasso(benchmark::State& state) {
  const auto D = unit_dictionary(25, 60, 3);
  const Eigen::MatrixXd X = gaussian(25, 2000, 4);
  LarsOptions o;
  o.lambda = 0.15;
  for (auto _ : state) benchmark::DoNotOptimize(lars_lasso_encode(D, X, o));
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_LarsLasso);

void BM_KsvdIteration(benchmark::State& state) {
  const Eigen::MatrixXd X = gaussian(25, 2000, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ksvd_fit(X, KsvdOptions{60, 3, 1, 6}));
}
BENCHMARK(BM_KsvdIteration)->Unit(benchmark::kMillisecond);

void BM_OnlineIteration(benchmark::State& state) {
  const std::vector<Eigen::MatrixXd> stream{gaussian(25, 3000, 7)};
  OnlineOptions o;
  o.iterations = 10;
  for (auto _ : state) benchmark::DoNotOptimize(online_fit(stream, o));
}
BENCHMARK(BM_OnlineIteration)->Unit(benchmark::kMillisecond);

void BM_ThinToIdempotence(benchmark::State& state) {
  const auto img = synth_generate(1, {1, 1}, SynthStyle{}, 8).writers[0].genuine[0];
  const auto bin = otsu_threshold(img).binary;
  for (auto _ : state) benchmark::DoNotOptimize(thin_to_level(bin, 100));
}
BENCHMARK(BM_ThinToIdempotence)->Unit(benchmark::kMillisecond);

void BM_OptimalThinningLevel(benchmark::State& state) {
  const auto img = synth_generate(1, {1, 1}, SynthStyle{}, 9).writers[0].genuine[0];
  const auto bin = otsu_threshold(img).binary;
  for (auto _ : state) benchmark::DoNotOptimize(optimal_thinning_level(bin, 5));
}
BENCHMARK(BM_OptimalThinningLevel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
