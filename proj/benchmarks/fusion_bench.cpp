#include <vector>

#include <benchmark/benchmark.h>

#include "fusionkit/experiment.hpp"
#include "fusionkit/fusion.hpp"

namespace {

std::vector<fusionkit::ScoreMatrix> make_scores(std::size_t rows, std::size_t classes, std::size_t count) {
  std::vector<fusionkit::ScoreMatrix> out;
  for (std::size_t j = 0; j < count; ++j) out.push_back(fusionkit::random_score_matrix(rows, classes, 100 + j));
  return out;
}

void BM_EntropyWeightedFusion(benchmark::State& state) {
  const auto scores = make_scores(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)),
                                  static_cast<std::size_t>(state.range(2)));
  const fusionkit::EntropyConfig config;
  for (auto _ : state) {
    auto result = fusionkit::entropy_weighted_fusion(scores, config);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1) * state.range(2));
}

void BM_SumFusion(benchmark::State& state) {
  const auto scores = make_scores(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 3);
  for (auto _ : state) {
    auto result = fusionkit::sum_fusion(scores);
    benchmark::DoNotOptimize(result);
  }
}

void BM_ClassifierEntropy(benchmark::State& state) {
  const auto scores = make_scores(static_cast<std::size_t>(state.range(0)), 6, 1);
  const fusionkit::EntropyConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(fusionkit::classifier_entropy(scores[0], config));
}

}  // namespace

BENCHMARK(BM_EntropyWeightedFusion)
    ->ArgsProduct({{1000, 10000, 100000}, {6, 20}, {2, 3, 5}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SumFusion)->ArgsProduct({{1000, 100000}, {6, 20}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifierEntropy)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
