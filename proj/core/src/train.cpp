#include "pourlab/train.hpp"

#include <ostream>
#include <random>

#include "pourlab/error.hpp"

namespace pourlab::rl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) + index);
}

TrainResult train(const EnvFactory& factory, const reward::RewardWeights& weights,
                  const PPOConfig& config, std::uint64_t seed) {
  validate(config);
  auto env = factory(weights);
  std::mt19937_64 rng(seed);

  TrainResult result;
  PolicyParams& params = result.params;
  params = PolicyParams::create(env->observation_size(), env->action_size(), config.hidden,
                                config.init_log_std, rng);
  params.trained_weights = weights;
  AdamState adam(params.flat.size());
  RolloutBuffer buffer(env->observation_size(), env->action_size());

  std::uint64_t episode_index = 0;
  std::vector<double> obs = env->reset(derive_seed(seed, kTrainEpisodeStream, episode_index++));
  double episode_return = 0.0;
  int episode_length = 0;
  long steps = 0;
  CurvePoint last;

  for (int iteration = 0; steps + config.rollout_length <= config.total_steps; ++iteration) {
    buffer.clear();
    CurvePoint point;
    double return_sum = 0.0, length_sum = 0.0, score_sum = 0.0;
    for (int t = 0; t < config.rollout_length; ++t) {
      params.obs_norm.update(obs);
      const std::vector<double> norm_obs = params.obs_norm.normalize(obs);
      const ActionSample sample = sample_action(params, norm_obs, rng);
      const double value = value_estimate(params, norm_obs);
      Transition tr = env->step(sample.action);
      buffer.push(norm_obs, sample.action, sample.log_prob, tr.reward, value, tr.done);
      episode_return += tr.reward;
      episode_length += 1;
      if (tr.done) {
        point.episodes += 1;
        return_sum += episode_return;
        length_sum += episode_length;
        score_sum += tr.score;
        episode_return = 0.0;
        episode_length = 0;
        obs = env->reset(derive_seed(seed, kTrainEpisodeStream, episode_index++));
      } else {
        obs = std::move(tr.observation);
      }
    }
    steps += config.rollout_length;
    buffer.bootstrap_value = value_estimate(params, params.obs_norm.normalize(obs));

    const UpdateStats stats = ppo_update(params, adam, buffer, config, rng);
    point.iteration = iteration;
    point.env_steps = steps;
    if (point.episodes > 0) {
      point.mean_return = return_sum / point.episodes;
      point.mean_length = length_sum / point.episodes;
      point.mean_score = score_sum / point.episodes;
    } else {
      point.mean_return = last.mean_return;
      point.mean_length = last.mean_length;
      point.mean_score = last.mean_score;
    }
    point.policy_loss = stats.policy_loss;
    point.value_loss = stats.value_loss;
    point.entropy = stats.entropy;
    point.clip_fraction = stats.clip_fraction;
    point.approx_kl = stats.approx_kl;
    point.mean_ratio = stats.mean_ratio;
    point.aborted = stats.aborted;
    result.curve.push_back(point);
    last = point;
  }
  return result;
}

std::vector<EvalEpisode> evaluate(const PolicyParams& params, Environment& env, int episodes,
                                  std::uint64_t seed_base, bool deterministic) {
  if (episodes < 0) throw UsageError("evaluate: negative episode count");
  std::vector<EvalEpisode> out;
  out.reserve(episodes);
  std::mt19937_64 rng(derive_seed(seed_base, kEvalEpisodeStream, ~0ULL));
  for (int k = 0; k < episodes; ++k) {
    std::vector<double> obs = env.reset(derive_seed(seed_base, kEvalEpisodeStream, k));
    EvalEpisode ep;
    for (;;) {
      const auto norm_obs = params.obs_norm.normalize(obs);
      const std::vector<double> action = deterministic ? policy_mean(params, norm_obs)
                                                       : sample_action(params, norm_obs, rng).action;
      Transition tr = env.step(action);
      ep.total_return += tr.reward;
      ep.length += 1;
      if (tr.done) {
        ep.score = tr.score;
        break;
      }
      obs = std::move(tr.observation);
    }
    out.push_back(ep);
  }
  return out;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  const auto old_precision = out.precision(10);
  out << "iteration,env_steps,episodes,mean_return,mean_length,mean_score,policy_loss,"
         "value_loss,entropy,clip_fraction,approx_kl,mean_ratio,aborted\n";
  for (const auto& p : curve) {
    out << p.iteration << ',' << p.env_steps << ',' << p.episodes << ',' << p.mean_return << ','
        << p.mean_length << ',' << p.mean_score << ',' << p.policy_loss << ',' << p.value_loss
        << ',' << p.entropy << ',' << p.clip_fraction << ',' << p.approx_kl << ','
        << p.mean_ratio << ',' << (p.aborted ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace pourlab::rl
