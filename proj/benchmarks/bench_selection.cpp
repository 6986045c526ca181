#include <asymcast/ensemble.hpp>
#include <asymcast/markdown.hpp>
#include <asymcast/random.hpp>

#include <benchmark/benchmark.h>

using namespace asymcast;

namespace {

struct Library {
  std::vector<Vector> preds;
  Vector y;
};

Library make_library(Eigen::Index n, int models) {
  Rng rng(3);
  Library lib{{}, Vector(n)};
  for (auto& v : lib.y) v = rng.uniform(0.2, 0.9);
  for (int m = 0; m < models; ++m) {
    Vector p(n);
    const double bias = rng.normal(0, 0.02);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = lib.y[i] + bias + rng.normal(0, 0.05);
    lib.preds.push_back(std::move(p));
  }
  return lib;
}

void BM_EnsembleSelect(benchmark::State& state) {
  const auto lib = make_library(3000, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(ensemble_select(lib.preds, lib.y, CostSpec::qqc(0.4, 1)));
}
BENCHMARK(BM_EnsembleSelect)->Arg(51)->Arg(101)->Unit(benchmark::kMillisecond);

void BM_FitMarkdown(benchmark::State& state) {
  const auto lib = make_library(3000, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_markdown(lib.preds[0], lib.y, CostSpec::qqc(0.4, 1)));
}
BENCHMARK(BM_FitMarkdown)->Unit(benchmark::kMicrosecond);

}  // namespace
