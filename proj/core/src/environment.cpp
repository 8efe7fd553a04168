#include "pourlab/environment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pourlab/error.hpp"

namespace pourlab::rl {

PourEnvironment::PourEnvironment(sim::EnvConfig config, reward::RewardWeights weights)
    : config_(std::move(config)), weights_(weights) {
  sim::validate(config_);
  reward::validate(weights_);
}

std::vector<double> PourEnvironment::reset(std::uint64_t seed) {
  auto [state, obs] = sim::reset(config_, seed);
  state_ = std::move(state);
  last_info_ = {};
  previous_ = {};
  return {obs.begin(), obs.end()};
}

Transition PourEnvironment::step(std::span<const double> action) {
  if (static_cast<int>(action.size()) != sim::kJoints) {
    throw UsageError("PourEnvironment::step: action size mismatch");
  }
  sim::Action a;
  std::copy(action.begin(), action.end(), a.torques.begin());
  const sim::StepResult r = sim::step(state_, a, config_);
  last_info_ = r.info;
  const reward::RewardInputs current{r.info.accuracy, r.info.elapsed, r.info.effort};
  Transition t;
  t.reward = reward::per_step_reward(weights_, previous_, current);
  previous_ = current;
  t.observation.assign(r.observation.begin(), r.observation.end());
  t.done = r.done;
  t.score = r.info.accuracy;
  return t;
}

EnvFactory pour_env_factory(const sim::EnvConfig& config) {
  return [config](const reward::RewardWeights& weights) -> std::unique_ptr<Environment> {
    return std::make_unique<PourEnvironment>(config, weights);
  };
}

DoubleIntegrator::DoubleIntegrator(DoubleIntegratorConfig config) : config_(config) {}

std::vector<double> DoubleIntegrator::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-config_.position_range, config_.position_range);
  position_ = u(rng);
  target_ = u(rng);
  velocity_ = 0.0;
  steps_ = 0;
  reached_ = false;
  return observe();
}

std::vector<double> DoubleIntegrator::observe() const {
  return {position_ - target_, velocity_, static_cast<double>(steps_) / config_.horizon};
}

Transition DoubleIntegrator::step(std::span<const double> action) {
  if (action.size() != 1) throw UsageError("DoubleIntegrator::step: action size mismatch");
  const double force = std::clamp(std::isfinite(action[0]) ? action[0] : 0.0,
                                  -config_.force_limit, config_.force_limit);
  velocity_ += config_.dt * force;
  position_ += config_.dt * velocity_;
  steps_ += 1;
  const double error = std::abs(position_ - target_);
  reached_ = error < config_.reach_tolerance && std::abs(velocity_) < config_.velocity_tolerance;
  Transition t;
  t.reward = -config_.dt * error - 0.01 * config_.dt * force * force + (reached_ ? 1.0 : 0.0);
  t.done = reached_ || steps_ >= config_.horizon;
  t.score = reached_ ? 1.0 : 0.0;
  t.observation = observe();
  return t;
}

EnvFactory double_integrator_factory(DoubleIntegratorConfig config) {
  return [config](const reward::RewardWeights&) -> std::unique_ptr<Environment> {
    return std::make_unique<DoubleIntegrator>(config);
  };
}

}  // namespace pourlab::rl
