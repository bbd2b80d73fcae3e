#include <benchmark/benchmark.h>

#include "tsneflow/geometry.hpp"
#include "tsneflow/high_affinity.hpp"
#include "tsneflow/kl_flow.hpp"

using namespace tsneflow;

namespace {

Dataset circle(std::size_t n, std::uint64_t seed = 1) {
  ManifoldSpec spec;
  spec.seed = seed;
  return sample(spec, n);
}

SymAffinity circle_affinity(std::size_t n) {
  return symmetrize(calibrate(circle(n), perplexity_from_zeta(n, 0.1)));
}

void BM_Calibrate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = circle(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(data, perplexity_from_zeta(n, 0.1)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Calibrate)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_Gradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = circle_affinity(n);
  const auto y = gaussian_init(n, 2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kl_gradient(p, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gradient)->RangeMultiplier(2)->Range(64, 2048)->Complexity(benchmark::oNSquared);

void BM_FlowStepRk4(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = circle_affinity(n);
  auto y = gaussian_init(n, 3, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(flow_step(p, y, 0.1));
}
BENCHMARK(BM_FlowStepRk4)->Arg(100)->Arg(300)->Arg(1000);

void BM_W1Exact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = circle(n, 1);
  const auto b = circle(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(w1_exact(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W1Exact)->RangeMultiplier(2)->Range(32, 512)->Complexity(benchmark::oNCubed);

void BM_IntrinsicDim(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = circle(n);
  const std::vector<double> z{1.0, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_intrinsic_dim(data, z, scaling_regime_grid(data)));
  }
}
BENCHMARK(BM_IntrinsicDim)->Arg(1000)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
