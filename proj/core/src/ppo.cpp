#include "pourlab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pourlab/error.hpp"

namespace pourlab::rl {

void validate(const PPOConfig& c) {
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw ConfigError("gamma", "must be in [0, 1]");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw ConfigError("lambda", "must be in [0, 1]");
  if (!(c.clip > 0.0)) throw ConfigError("clip", "must be > 0");
  if (c.epochs < 1) throw ConfigError("epochs", "must be >= 1");
  if (c.minibatch_size < 1) throw ConfigError("minibatch_size", "must be >= 1");
  if (!(std::isfinite(c.learning_rate) && c.learning_rate > 0.0)) {
    throw ConfigError("learning_rate", "must be > 0");
  }
  if (!(std::isfinite(c.entropy_coef))) throw ConfigError("entropy_coef", "must be finite");
  if (!(std::isfinite(c.value_coef) && c.value_coef >= 0.0)) {
    throw ConfigError("value_coef", "must be >= 0");
  }
  if (c.rollout_length < 1) throw ConfigError("rollout_length", "must be >= 1");
  if (c.total_steps < 0) throw ConfigError("total_steps", "must be >= 0");
  if (c.hidden.empty()) throw ConfigError("hidden", "needs at least one hidden layer");
  for (int h : c.hidden) {
    if (h < 1) throw ConfigError("hidden", "layer sizes must be >= 1");
  }
  if (!(c.init_log_std >= kLogStdMin && c.init_log_std <= kLogStdMax)) {
    throw ConfigError("init_log_std", "must be within the log-std clamp range");
  }
}

void RolloutBuffer::clear() {
  observations.clear();
  actions.clear();
  log_probs.clear();
  rewards.clear();
  values.clear();
  dones.clear();
  bootstrap_value = 0.0;
}

void RolloutBuffer::push(std::span<const double> obs, std::span<const double> action,
                         double log_prob, double reward, double value, bool done) {
  if (static_cast<int>(obs.size()) != obs_dim || static_cast<int>(action.size()) != act_dim) {
    throw UsageError("RolloutBuffer::push: dimension mismatch");
  }
  observations.insert(observations.end(), obs.begin(), obs.end());
  actions.insert(actions.end(), action.begin(), action.end());
  log_probs.push_back(log_prob);
  rewards.push_back(reward);
  values.push_back(value);
  dones.push_back(done ? 1 : 0);
}

std::span<const double> RolloutBuffer::observation(int t) const {
  return std::span<const double>(observations).subspan(static_cast<std::size_t>(t) * obs_dim,
                                                       obs_dim);
}

std::span<const double> RolloutBuffer::action(int t) const {
  return std::span<const double>(actions).subspan(static_cast<std::size_t>(t) * act_dim, act_dim);
}

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  const int n = buffer.size();
  if (n == 0) throw UsageError("compute_gae: empty buffer");
  GaeResult out;
  out.advantages.resize(n);
  out.targets.resize(n);
  double running = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double next_value = (t == n - 1) ? buffer.bootstrap_value : buffer.values[t + 1];
    const double live = buffer.dones[t] ? 0.0 : 1.0;
    const double delta = buffer.rewards[t] + gamma * next_value * live - buffer.values[t];
    running = delta + gamma * lambda * live * running;
    out.advantages[t] = running;
  }
  for (int t = 0; t < n; ++t) out.targets[t] = out.advantages[t] + buffer.values[t];
  return out;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.size() < 2) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  for (double& a : adv) a = (a - mean) / (std + 1e-8);
}

LossBreakdown ppo_loss(const PolicyParams& params, const RolloutBuffer& buffer,
                       std::span<const int> indices, std::span<const double> advantages,
                       std::span<const double> targets, double clip, const LossWeights& weights,
                       std::span<double> grad) {
  if (indices.empty()) throw UsageError("ppo_loss: empty minibatch");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != params.flat.size()) {
    throw UsageError("ppo_loss: gradient buffer size mismatch");
  }
  const int act_dim = params.act_dim();
  const double inv_b = 1.0 / static_cast<double>(indices.size());
  const auto log_std = params.log_std();
  std::vector<double> inv_var(act_dim);
  for (int d = 0; d < act_dim; ++d) inv_var[d] = std::exp(-2.0 * log_std[d]);

  std::span<double> g_actor, g_log_std, g_critic;
  if (want_grad) {
    g_actor = grad.subspan(params.actor_offset(), params.actor.param_count());
    g_log_std = grad.subspan(params.log_std_offset(), act_dim);
    g_critic = grad.subspan(params.critic_offset(), params.critic.param_count());
  }

  LossBreakdown out;
  MlpCache actor_cache;
  MlpCache critic_cache;
  std::vector<double> mean_grad(act_dim);
  for (int idx : indices) {
    const auto obs = buffer.observation(idx);
    const auto action = buffer.action(idx);
    const double adv = advantages[idx];

    const auto mean = mlp_forward(params.actor, params.actor_params(), obs, actor_cache,
                                  params.generation);
    const double log_prob = gaussian_log_prob(action, mean, log_std);
    const double log_ratio = log_prob - buffer.log_probs[idx];
    const double ratio = std::exp(log_ratio);
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    const double surr = ratio * adv;
    const double surr_clipped = clipped * adv;
    const bool unclipped_active = surr <= surr_clipped;
    out.policy += -std::min(surr, surr_clipped) * inv_b;
    out.mean_ratio += ratio * inv_b;
    out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
    if (std::abs(ratio - 1.0) > clip) out.clip_fraction += inv_b;

    const double v = mlp_forward(params.critic, params.critic_params(), obs, critic_cache,
                                 params.generation)[0];
    const double err = v - targets[idx];
    out.value += err * err * inv_b;

    if (!want_grad) continue;
    // d(policy term)/d(log_prob) = -A * ratio when the unclipped branch is the min.
    const double g_lp = unclipped_active ? -weights.policy * adv * ratio * inv_b : 0.0;
    if (g_lp != 0.0) {
      for (int d = 0; d < act_dim; ++d) {
        const double diff = action[d] - mean[d];
        mean_grad[d] = g_lp * diff * inv_var[d];
        g_log_std[d] += g_lp * (diff * diff * inv_var[d] - 1.0);
      }
      mlp_backward(params.actor, params.actor_params(), actor_cache, mean_grad, g_actor, {},
                   params.generation);
    }
    const double g_v = weights.value * 2.0 * err * inv_b;
    if (g_v != 0.0) {
      mlp_backward(params.critic, params.critic_params(), critic_cache, std::span(&g_v, 1),
                   g_critic, {}, params.generation);
    }
  }
  out.entropy = gaussian_entropy(log_std);
  if (want_grad) {
    for (int d = 0; d < act_dim; ++d) g_log_std[d] -= weights.entropy;
  }
  out.total = weights.policy * out.policy + weights.value * out.value -
              weights.entropy * out.entropy;
  return out;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamHyper& hyper) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw UsageError("adam_step: size mismatch");
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
}

UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const RolloutBuffer& buffer,
                       const PPOConfig& config, std::mt19937_64& rng) {
  const int n = buffer.size();
  GaeResult gae = compute_gae(buffer, config.gamma, config.lambda);
  normalize_advantages(gae.advantages);

  const std::vector<double> saved_params = params.flat;
  const AdamState saved_adam = adam;
  const std::uint64_t saved_generation = params.generation;

  UpdateStats stats;
  const LossWeights weights{1.0, config.value_coef, config.entropy_coef};
  const AdamHyper hyper{config.learning_rate};
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(params.flat.size());

  auto abort = [&](const std::string& why) {
    params.flat = saved_params;
    params.generation = saved_generation + 1;
    adam = saved_adam;
    UpdateStats failed;
    failed.aborted = true;
    failed.diagnostic = why;
    return failed;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += config.minibatch_size) {
      const int end = std::min(n, start + config.minibatch_size);
      const std::span<const int> batch(order.data() + start, end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      const LossBreakdown loss =
          ppo_loss(params, buffer, batch, gae.advantages, gae.targets, config.clip, weights, grad);
      if (!std::isfinite(loss.total)) {
        return abort("non-finite loss in epoch " + std::to_string(epoch));
      }
      double norm_sq = 0.0;
      for (double g : grad) norm_sq += g * g;
      if (!std::isfinite(norm_sq)) {
        return abort("non-finite gradient in epoch " + std::to_string(epoch));
      }
      const double norm = std::sqrt(norm_sq);
      if (config.max_grad_norm > 0.0 && norm > config.max_grad_norm) {
        const double scale = config.max_grad_norm / norm;
        for (double& g : grad) g *= scale;
      }
      adam_step(params.flat, grad, adam, hyper);
      params.clamp_log_std();
      params.generation += 1;

      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      stats.mean_ratio += loss.mean_ratio;
      stats.clip_fraction += loss.clip_fraction;
      stats.approx_kl += loss.approx_kl;
      stats.minibatches += 1;
    }
  }
  if (!params.all_finite()) return abort("non-finite parameters after update");
  if (stats.minibatches > 0) {
    const double k = 1.0 / stats.minibatches;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.mean_ratio *= k;
    stats.clip_fraction *= k;
    stats.approx_kl *= k;
  }
  return stats;
}

}  // namespace pourlab::rl
