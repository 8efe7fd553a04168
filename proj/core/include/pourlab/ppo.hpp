#ifndef POURLAB_PPO_HPP_
#define POURLAB_PPO_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pourlab/policy.hpp"

namespace pourlab::rl {

struct PPOConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs = 10;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  int rollout_length = 2048;
  long total_steps = 1'000'000;
  std::vector<int> hidden{64, 64};
  double init_log_std = 0.0;
  double max_grad_norm = 0.5;  // <= 0 disables global norm clipping
};

void validate(const PPOConfig& config);

// Aligned per-step arrays for one rollout. Observations are stored already
// normalized, exactly as the collecting policy saw them.
struct RolloutBuffer {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> observations;  // T x obs_dim
  std::vector<double> actions;       // T x act_dim
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;  // episode ended after this step
  double bootstrap_value = 0.0;      // V(s_T) for the state after the last step

  RolloutBuffer() = default;
  RolloutBuffer(int obs, int act) : obs_dim(obs), act_dim(act) {}

  int size() const { return static_cast<int>(rewards.size()); }
  void clear();
  void push(std::span<const double> obs, std::span<const double> action, double log_prob,
            double reward, double value, bool done);
  std::span<const double> observation(int t) const;
  std::span<const double> action(int t) const;
};

struct GaeResult {
  std::vector<double> advantages;  // raw, not normalized
  std::vector<double> targets;     // advantages + values
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}
GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

// Zero mean, unit variance. Left untouched when fewer than two entries.
void normalize_advantages(std::vector<double>& advantages);

// Coefficients for the three loss terms; ppo_update uses (1, value_coef, entropy_coef).
struct LossWeights {
  double policy = 1.0;
  double value = 0.5;
  double entropy = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;   // mean of -min(r A, clip(r) A)
  double value = 0.0;    // mean of (V - target)^2
  double entropy = 0.0;  // entropy of the action distribution
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Minibatch loss
//   policy * mean(-min(r A, clip(r, 1-eps, 1+eps) A))
//   + value * mean((V - target)^2) - entropy * H
// and, if `grad` is non-empty, its exact gradient with respect to params.flat
// (accumulated, so `grad` must start zeroed).
LossBreakdown ppo_loss(const PolicyParams& params, const RolloutBuffer& buffer,
                       std::span<const int> indices, std::span<const double> advantages,
                       std::span<const double> targets, double clip, const LossWeights& weights,
                       std::span<double> grad);

struct AdamHyper {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamHyper& hyper);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
  bool aborted = false;
  std::string diagnostic;
};

// Epochs of shuffled minibatch updates over one rollout. A non-finite loss or
// gradient aborts the update and restores params and optimizer state.
UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const RolloutBuffer& buffer,
                       const PPOConfig& config, std::mt19937_64& rng);

}  // namespace pourlab::rl

#endif  // POURLAB_PPO_HPP_
