#include <benchmark/benchmark.h>

#include "blockdisc/bitseq.hpp"
#include "blockdisc/discrepancy.hpp"
#include "blockdisc/montecarlo.hpp"
#include "blockdisc/thresholds.hpp"

using namespace blockdisc;

static void BM_Generate(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate(Seed{1, 0}, len));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(len / 8));
}
BENCHMARK(BM_Generate)->Range(1 << 12, 1 << 22);

static void BM_Dk(benchmark::State& state) {
  const auto k = static_cast<unsigned>(state.range(0));
  const std::uint64_t n = std::uint64_t{1} << 20;
  const auto t = generate(Seed{1, 0}, n + k - 1);
  for (auto _ : state) benchmark::DoNotOptimize(dk(t, k, n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Dk)->DenseRange(1, 16, 5);

static void BM_Profile(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto t = generate(Seed{1, 0}, len);
  const auto s = parse_schedule("form:1,-1,-1");
  const auto checkpoints = geometric_checkpoints(64, len - 64, 64);
  for (auto _ : state) benchmark::DoNotOptimize(profile(t, s, checkpoints));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len));
}
BENCHMARK(BM_Profile)->RangeMultiplier(4)->Range(1 << 16, 1 << 22)->Unit(benchmark::kMillisecond);

static void BM_Phi(benchmark::State& state) {
  std::uint64_t n = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi(ThresholdFn::constant(2), n));
    n = (n * 3 + 1) & ((std::uint64_t{1} << 40) - 1);
    if (n < 2) n = 2;
  }
}
BENCHMARK(BM_Phi);

static void BM_Experiment(benchmark::State& state) {
  ExperimentSpec spec;
  spec.trials = 32;
  spec.length = std::uint64_t{1} << 16;
  spec.checkpoints = dyadic_checkpoints(12, 16);
  spec.schedules = {{"s", parse_schedule("form:1,-1,-1")}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(spec, RunOptions{static_cast<unsigned>(state.range(0))}));
  }
}
BENCHMARK(BM_Experiment)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_MAIN();
