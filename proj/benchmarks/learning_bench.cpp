#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "pourlab/mlp.hpp"
#include "pourlab/policy.hpp"
#include "pourlab/ppo.hpp"
#include "pourlab/pour_sim.hpp"

namespace {

using namespace pourlab;

rl::MlpShape shape(int width) { return rl::MlpShape{{sim::kObsDim, width, width, sim::kJoints}}; }

void BM_MlpForward(benchmark::State& bench) {
  const rl::MlpShape s = shape(static_cast<int>(bench.range(0)));
  std::mt19937_64 rng(1);
  std::vector<double> params(s.param_count()), input(sim::kObsDim, 0.3);
  rl::mlp_init(s, params, rng, 1.0, 0.01);
  rl::MlpCache cache;
  for (auto _ : bench) benchmark::DoNotOptimize(rl::mlp_forward(s, params, input, cache));
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(128);

void BM_MlpForwardBackward(benchmark::State& bench) {
  const rl::MlpShape s = shape(static_cast<int>(bench.range(0)));
  std::mt19937_64 rng(1);
  std::vector<double> params(s.param_count()), grad(s.param_count()), input(sim::kObsDim, 0.3);
  const std::vector<double> out_grad{1.0, -0.5, 0.25};
  rl::mlp_init(s, params, rng, 1.0, 0.01);
  rl::MlpCache cache;
  for (auto _ : bench) {
    rl::mlp_forward(s, params, input, cache);
    rl::mlp_backward(s, params, cache, out_grad, grad);
  }
  benchmark::DoNotOptimize(grad.data());
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(128);

rl::RolloutBuffer random_rollout(const rl::PolicyParams& params, int length, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  rl::RolloutBuffer buffer(params.obs_dim(), params.act_dim());
  for (int t = 0; t < length; ++t) {
    std::vector<double> obs(static_cast<std::size_t>(params.obs_dim()));
    for (double& o : obs) o = noise(rng);
    const auto sample = rl::sample_action(params, obs, rng);
    buffer.push(obs, sample.action, sample.log_prob, noise(rng), rl::value_estimate(params, obs),
                t % 300 == 299);
  }
  return buffer;
}

// One full PPO update over a 2048-step rollout of the pouring task's shape.
void BM_PpoUpdate(benchmark::State& bench) {
  std::mt19937_64 rng(7);
  rl::PPOConfig config;
  config.hidden = {64, 64};
  const auto initial = rl::PolicyParams::create(sim::kObsDim, sim::kJoints, config.hidden, 0.5, rng);
  const auto buffer = random_rollout(initial, config.rollout_length, rng);
  for (auto _ : bench) {
    bench.PauseTiming();
    rl::PolicyParams params = initial;
    rl::AdamState adam(params.flat.size());
    std::mt19937_64 shuffle(11);
    bench.ResumeTiming();
    benchmark::DoNotOptimize(rl::ppo_update(params, adam, buffer, config, shuffle));
  }
}
BENCHMARK(BM_PpoUpdate)->Unit(benchmark::kMillisecond);

void BM_Gae(benchmark::State& bench) {
  std::mt19937_64 rng(5);
  const auto params = rl::PolicyParams::create(sim::kObsDim, sim::kJoints, {8}, 0.0, rng);
  const auto buffer = random_rollout(params, 2048, rng);
  for (auto _ : bench) benchmark::DoNotOptimize(rl::compute_gae(buffer, 0.99, 0.95));
}
BENCHMARK(BM_Gae);

}  // namespace
