#include <asymcast/models/knn.hpp>
#include <asymcast/models/quantile.hpp>
#include <asymcast/models/tree.hpp>
#include <asymcast/split.hpp>
#include <asymcast/synth.hpp>

#include <benchmark/benchmark.h>

#include <map>

using namespace asymcast;

namespace {

const DataSplits& data(std::size_t n) {
  static std::map<std::size_t, DataSplits> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    SynthConfig cfg;
    cfg.n = n;
    it = cache.emplace(n, standardize(split(synth_generate(cfg), 1))).first;
  }
  return it->second;
}

void BM_FitQuantile(benchmark::State& state) {
  const auto& d = data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_quantile(d.ats.features, d.ats.target, 0.2));
}
BENCHMARK(BM_FitQuantile)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FitTree(benchmark::State& state) {
  const auto& d = data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(d.ats.features, d.ats.target, 0.0, 5));
}
BENCHMARK(BM_FitTree)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FitForest(benchmark::State& state) {
  const auto& d = data(10000);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_random_forest(d.ats.features, d.ats.target, 50, 5, 7));
}
BENCHMARK(BM_FitForest)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
  const auto& d = data(10000);
  const auto algo = state.range(0) ? KnnAlgorithm::KdTree : KnnAlgorithm::BruteForce;
  const Model m = fit_knn(d.ats.features, d.ats.target, 20, algo);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(d.validation.features));
}
BENCHMARK(BM_KnnPredict)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
