#ifndef POURLAB_TRAIN_HPP_
#define POURLAB_TRAIN_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pourlab/environment.hpp"
#include "pourlab/policy.hpp"
#include "pourlab/ppo.hpp"

namespace pourlab::rl {

// Independent, reproducible sub-seed for (base seed, stream, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

inline constexpr std::uint64_t kTrainEpisodeStream = 1;
inline constexpr std::uint64_t kEvalEpisodeStream = 2;

struct CurvePoint {
  int iteration = 0;
  long env_steps = 0;
  int episodes = 0;         // episodes finished during this iteration
  double mean_return = 0.0; // over those episodes (carried forward when none)
  double mean_length = 0.0;
  double mean_score = 0.0;  // task score at episode end
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double mean_ratio = 0.0;
  bool aborted = false;
};

struct TrainResult {
  PolicyParams params;
  std::vector<CurvePoint> curve;
};

// Alternates rollout collection and ppo_update until another full rollout
// would exceed config.total_steps. Pure function of its arguments.
TrainResult train(const EnvFactory& factory, const reward::RewardWeights& weights,
                  const PPOConfig& config, std::uint64_t seed);

struct EvalEpisode {
  double total_return = 0.0;
  int length = 0;
  double score = 0.0;
};

// Runs `episodes` episodes with frozen observation statistics. Episode k
// resets with derive_seed(seed_base, kEvalEpisodeStream, k).
std::vector<EvalEpisode> evaluate(const PolicyParams& params, Environment& env, int episodes,
                                  std::uint64_t seed_base, bool deterministic = true);

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace pourlab::rl

#endif  // POURLAB_TRAIN_HPP_
