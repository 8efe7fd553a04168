#ifndef POURLAB_REWARD_HPP_
#define POURLAB_REWARD_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace pourlab::reward {

// Weights of the cost-benefit reward. w_a is never mutated.
struct RewardWeights {
  double w_a = 1.0;  // accuracy
  double w_t = 4.0;  // time constant of the exponential discount, s
  double w_e = 0.2;  // effort
  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

void validate(const RewardWeights& weights);

struct MutationSpec {
  double sigma_t = 1.0;
  double sigma_e = 0.05;
  std::vector<double> grid_offsets{-2.0, -1.0, 0.0, 1.0, 2.0};  // in sigma units
};

void validate(const MutationSpec& spec);

// Reward inputs for one step.
struct RewardInputs {
  double accuracy = 0.0;  // A in [0, 1]
  double elapsed = 0.0;   // t >= 0, s
  double effort = 0.0;    // E >= 0
};

// exp(-t / w_t) * w_a * A - w_e * E. Throws NumericError on non-finite input.
double compute_reward(const RewardWeights& weights, const RewardInputs& info);

enum class WeightKind { kTime, kEffort };

// base + N(0, sigma^2), resampled until the result is valid for `kind`
// (w_t > 0, w_e >= 0). Throws ConfigError when sigma <= 0.
double mutate_weight(double base, double sigma, WeightKind kind, std::mt19937_64& rng);

// Randomly mutated copy of `base` (w_t and w_e perturbed, w_a kept).
RewardWeights mutate_weights(const RewardWeights& base, const MutationSpec& spec,
                             std::mt19937_64& rng);

// Cartesian product of time and effort offsets, time outer, effort inner.
// Clamped to w_t >= 0.1 * base.w_t and w_e >= 0.
std::vector<RewardWeights> build_weight_grid(const RewardWeights& base, const MutationSpec& spec);

// Index of the all-zero-offset cell in build_weight_grid output.
int baseline_cell(const MutationSpec& spec);

// Dense per-step reward in difference form:
//   w_a * (exp(-t_k/w_t) A_k - exp(-t_{k-1}/w_t) A_{k-1}) - w_e * E_k
// Summed over an episode the accuracy part telescopes to the terminal value.
double per_step_reward(const RewardWeights& weights, const RewardInputs& previous,
                       const RewardInputs& current);

}  // namespace pourlab::reward

#endif  // POURLAB_REWARD_HPP_
