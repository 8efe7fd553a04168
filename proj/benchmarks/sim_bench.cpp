#include <random>

#include <benchmark/benchmark.h>

#include "pourlab/pour_sim.hpp"
#include "pourlab/reward.hpp"

namespace {

using namespace pourlab;

// One physics step with the wrist tipped so particles are emitted and flying.
void BM_StepWhilePouring(benchmark::State& bench) {
  sim::EnvConfig c;
  c.particle_count = static_cast<int>(bench.range(0));
  std::mt19937_64 gen(1);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto [state, obs] = sim::reset(c, 1);
  for (auto _ : bench) {
    if (state.done) {
      bench.PauseTiming();
      state = sim::reset(c, gen()).first;
      bench.ResumeTiming();
    }
    sim::Action a;
    a.torques = {noise(gen), noise(gen), noise(gen) - 1.5};
    benchmark::DoNotOptimize(sim::step(state, a, c));
  }
  bench.SetItemsProcessed(bench.iterations());
}
BENCHMARK(BM_StepWhilePouring)->Arg(200)->Arg(1000);

void BM_Observe(benchmark::State& bench) {
  const sim::EnvConfig c;
  const auto state = sim::reset(c, 3).first;
  for (auto _ : bench) benchmark::DoNotOptimize(sim::observe(state, c));
}
BENCHMARK(BM_Observe);

void BM_ComputeReward(benchmark::State& bench) {
  const reward::RewardWeights w{1.0, 4.0, 0.2};
  reward::RewardInputs in{0.6, 2.5, 0.3};
  for (auto _ : bench) {
    benchmark::DoNotOptimize(reward::compute_reward(w, in));
    in.elapsed += 1e-9;
  }
}
BENCHMARK(BM_ComputeReward);

void BM_WeightGrid(benchmark::State& bench) {
  for (auto _ : bench) benchmark::DoNotOptimize(reward::build_weight_grid({1.0, 4.0, 0.2}, {}));
}
BENCHMARK(BM_WeightGrid);

}  // namespace
