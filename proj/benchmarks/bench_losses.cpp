#include <asymcast/loss.hpp>
#include <asymcast/random.hpp>

#include <benchmark/benchmark.h>

using namespace asymcast;

namespace {

void BM_MeanLoss(benchmark::State& state, CostSpec spec) {
  const auto n = state.range(0);
  Rng rng(1);
  Vector y(n), f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = rng.uniform(0.2, 0.9);
    f[i] = y[i] + rng.normal(0, 0.05);
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval_mean(spec, y, f));
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK_CAPTURE(BM_MeanLoss, squared, CostSpec::squared_error())->Arg(3000)->Arg(100000);
BENCHMARK_CAPTURE(BM_MeanLoss, qqc, CostSpec::qqc(0.3, 1))->Arg(3000)->Arg(100000);
BENCHMARK_CAPTURE(BM_MeanLoss, qqc_approx, CostSpec::qqc_approx(0.3, 1))->Arg(3000)->Arg(100000);
BENCHMARK_CAPTURE(BM_MeanLoss, lec, CostSpec::lec(0.22, 17))->Arg(3000);
