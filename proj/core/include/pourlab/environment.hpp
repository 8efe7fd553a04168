#ifndef POURLAB_ENVIRONMENT_HPP_
#define POURLAB_ENVIRONMENT_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pourlab/pour_sim.hpp"
#include "pourlab/reward.hpp"

namespace pourlab::rl {

struct Transition {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  // Task-level score at episode end (fill fraction, or 1 for a reached target).
  double score = 0.0;
};

// MDP interface consumed by train().
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int observation_size() const = 0;
  virtual int action_size() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual Transition step(std::span<const double> action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(const reward::RewardWeights&)>;

// Pouring simulator with the per-step cost-benefit reward.
class PourEnvironment final : public Environment {
 public:
  PourEnvironment(sim::EnvConfig config, reward::RewardWeights weights);

  int observation_size() const override { return sim::kObsDim; }
  int action_size() const override { return sim::kJoints; }
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(std::span<const double> action) override;

  const sim::EnvState& state() const { return state_; }
  const sim::EnvConfig& config() const { return config_; }
  const sim::StepInfo& last_info() const { return last_info_; }

 private:
  sim::EnvConfig config_;
  reward::RewardWeights weights_;
  sim::EnvState state_;
  sim::StepInfo last_info_;
  reward::RewardInputs previous_{};
};

EnvFactory pour_env_factory(const sim::EnvConfig& config);

// Built-in diagnostic task: a 1-D point mass driven by a bounded force must
// come to rest at a randomly drawn target.
struct DoubleIntegratorConfig {
  double dt = 0.05;
  int horizon = 100;
  double force_limit = 1.0;
  double position_range = 1.0;  // start and target drawn from [-range, range]
  double reach_tolerance = 0.05;
  double velocity_tolerance = 0.1;
};

class DoubleIntegrator final : public Environment {
 public:
  explicit DoubleIntegrator(DoubleIntegratorConfig config = {});

  int observation_size() const override { return 3; }
  int action_size() const override { return 1; }
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(std::span<const double> action) override;

  bool reached() const { return reached_; }

 private:
  std::vector<double> observe() const;

  DoubleIntegratorConfig config_;
  double position_ = 0.0;
  double velocity_ = 0.0;
  double target_ = 0.0;
  int steps_ = 0;
  bool reached_ = false;
};

EnvFactory double_integrator_factory(DoubleIntegratorConfig config = {});

}  // namespace pourlab::rl

#endif  // POURLAB_ENVIRONMENT_HPP_
