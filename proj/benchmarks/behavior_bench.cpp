#include <random>
#include <sstream>

#include <benchmark/benchmark.h>

#include "pourlab/behavior.hpp"
#include "pourlab/harness.hpp"

namespace {

using namespace pourlab;

behavior::TrajectoryLog sample_log() {
  const sim::EnvConfig env;
  std::mt19937_64 rng(3);
  auto params = rl::PolicyParams::create(sim::kObsDim, sim::kJoints, {16}, 0.0, rng);
  // Bias the wrist output so the episode pours.
  params.actor_params().back() = -1.5;
  return harness::rollout_log(params, env, 5);
}

void BM_RolloutLog(benchmark::State& bench) {
  const sim::EnvConfig env;
  std::mt19937_64 rng(3);
  const auto params = rl::PolicyParams::create(sim::kObsDim, sim::kJoints, {64, 64}, 0.0, rng);
  for (auto _ : bench) benchmark::DoNotOptimize(harness::rollout_log(params, env, 5));
}
BENCHMARK(BM_RolloutLog)->Unit(benchmark::kMillisecond);

void BM_ExtractFeatures(benchmark::State& bench) {
  const auto log = sample_log();
  for (auto _ : bench) benchmark::DoNotOptimize(behavior::extract_features(log));
  bench.SetItemsProcessed(bench.iterations() * static_cast<long>(log.samples.size()));
}
BENCHMARK(BM_ExtractFeatures);

void BM_Classify(benchmark::State& bench) {
  const auto features = behavior::extract_features(sample_log());
  const behavior::ClassifierThresholds thresholds;
  for (auto _ : bench) benchmark::DoNotOptimize(behavior::classify(features, thresholds, 3.0));
}
BENCHMARK(BM_Classify);

void BM_WriteJsonl(benchmark::State& bench) {
  const auto log = sample_log();
  for (auto _ : bench) {
    std::ostringstream out;
    behavior::write_jsonl(out, log);
    benchmark::DoNotOptimize(out.str().size());
  }
}
BENCHMARK(BM_WriteJsonl)->Unit(benchmark::kMicrosecond);

}  // namespace
