#include <cmath>

#include <benchmark/benchmark.h>

#include "logitrank/constructions.hpp"
#include "logitrank/rng.hpp"
#include "logitrank/spectral.hpp"

namespace {

using namespace logitrank;

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed, "bench");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_SingularValues(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Matrix m = gaussian(n, 2 * n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(singular_values(m));
}
BENCHMARK(BM_SingularValues)->Arg(64)->Arg(128)->Arg(256);

void BM_TruncateRank(benchmark::State& state) {
  const Matrix m = gaussian(256, 512, 2);
  for (auto _ : state) benchmark::DoNotOptimize(truncate_rank(m, 16));
}
BENCHMARK(BM_TruncateRank);

void BM_RandomizedTruncateRank(benchmark::State& state) {
  const Matrix m = gaussian(256, 512, 2);
  for (auto _ : state) benchmark::DoNotOptimize(randomized_truncate_rank(m, 16));
}
BENCHMARK(BM_RandomizedTruncateRank);

void BM_FitPowerLaw(benchmark::State& state) {
  std::vector<double> s = {10.0};
  for (int i = 1; i < state.range(0); ++i) s.push_back(std::pow(i, -0.6));
  for (auto _ : state) benchmark::DoNotOptimize(fit_power_law(s, s.size()));
}
BENCHMARK(BM_FitPowerLaw)->Arg(1000)->Arg(10000);

void BM_AvgKl(benchmark::State& state) {
  const IsanOracle o(random_isan(4, 4, 6, 3));
  const LogitMatrix l = build_logit_matrix(o, all_sequences(4, 3), full_future_closure(4, 2));
  const Matrix a = truncate_rank(l.values, 2);
  for (auto _ : state) benchmark::DoNotOptimize(avg_kl(l, a));
}
BENCHMARK(BM_AvgKl);

}  // namespace
