#include <benchmark/benchmark.h>

#include "logitrank/constructions.hpp"
#include "logitrank/learner.hpp"
#include "logitrank/lingen.hpp"
#include "logitrank/logit_matrix.hpp"

namespace {

using namespace logitrank;

void BM_NextLogits(benchmark::State& state) {
  const TimeVaryingIsan m = random_isan(static_cast<std::size_t>(state.range(0)), 8, 32, 1);
  const Sequence prefix(31, 3);
  for (auto _ : state) benchmark::DoNotOptimize(next_logits(m, prefix));
}
BENCHMARK(BM_NextLogits)->Arg(4)->Arg(32);

void BM_BuildLogitMatrix(benchmark::State& state) {
  const IsanOracle o(random_isan(4, 3, 8, 2));
  const auto h = all_sequences(3, 4);
  const auto f = full_future_closure(3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_logit_matrix(o, h, f));
}
BENCHMARK(BM_BuildLogitMatrix);

void BM_ExactDistribution(benchmark::State& state) {
  const TimeVaryingIsan m = random_isan(3, 2, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(exact_distribution(m));
}
BENCHMARK(BM_ExactDistribution)->Arg(8)->Arg(12);

void BM_Steal(benchmark::State& state) {
  const IsanOracle o(random_isan(2, 3, 4, 4));
  LearnerConfig c;
  c.samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(steal(o, c));
}
BENCHMARK(BM_Steal)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LinGenEval(benchmark::State& state) {
  const IsanOracle o(random_isan(3, 2, 11, 5));
  const Sequence target = {0, 1, 1};
  std::vector<Sequence> h;
  for (const auto& s : all_sequences(2, 3))
    if (s != target) h.push_back(s);
  const LinGenCoefficients c = fit_lingen(o, h, full_future_closure(2, 2), target);
  for (auto _ : state) benchmark::DoNotOptimize(eval_per_token_kl(o, h, c, 8, 16, 1));
}
BENCHMARK(BM_LinGenEval)->Unit(benchmark::kMillisecond);

}  // namespace
