// Central finite-difference checks shared by the unit and acceptance tests.
#ifndef POURLAB_TESTS_GRADCHECK_HPP_
#define POURLAB_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "pourlab/policy.hpp"
#include "pourlab/ppo.hpp"

namespace pourlab::testing {

// Gradients smaller than this in both the analytic and numeric value are
// compared absolutely; a relative error is meaningless near zero.
inline constexpr double kGradFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
}

// Max relative error of `analytic` against central differences of `loss`
// around `x` with step h. `x` is restored before returning.
inline double max_fd_error(std::vector<double>& x, std::span<const double> analytic,
                           const std::function<double()>& loss, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = loss();
    x[i] = keep - h;
    const double down = loss();
    x[i] = keep;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

// Small random policy plus a batch whose stored log-probabilities put every
// ratio either near 1 or well inside the clipped region, never on a kink.
struct LossFixture {
  rl::PolicyParams params;
  rl::RolloutBuffer buffer;
  std::vector<int> indices;
  std::vector<double> advantages;
  std::vector<double> targets;
  double clip = 0.2;
};

inline LossFixture make_loss_fixture(std::uint64_t seed, int obs_dim = 4, int act_dim = 2,
                                     int batch = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> width(2, 6);
  LossFixture f;
  f.params = rl::PolicyParams::create(obs_dim, act_dim, {width(rng), width(rng)}, -0.3, rng);
  // Larger output weights so the actor head contributes visibly.
  for (double& w : f.params.actor_params()) w *= 20.0;
  for (double& s : f.params.log_std()) s = 0.4 * unit(rng);
  f.buffer = rl::RolloutBuffer(obs_dim, act_dim);
  for (int t = 0; t < batch; ++t) {
    std::vector<double> obs(obs_dim), action(act_dim);
    for (double& o : obs) o = unit(rng);
    const auto mean = rl::policy_mean(f.params, obs);
    for (int d = 0; d < act_dim; ++d) action[d] = mean[d] + unit(rng);
    const double lp = rl::gaussian_log_prob(action, mean, f.params.log_std());
    const double shift = (t % 3 == 0) ? 0.5 + 0.1 * unit(rng) : 0.1 * unit(rng);
    f.buffer.push(obs, action, lp + (t % 2 == 0 ? shift : -shift), unit(rng), unit(rng), false);
    f.indices.push_back(t);
    f.advantages.push_back(unit(rng));
    f.targets.push_back(unit(rng));
  }
  return f;
}

// Max relative error of ppo_loss's gradient for one loss-term weighting.
inline double ppo_loss_fd_error(LossFixture& f, const rl::LossWeights& weights) {
  std::vector<double> grad(f.params.flat.size(), 0.0);
  rl::ppo_loss(f.params, f.buffer, f.indices, f.advantages, f.targets, f.clip, weights, grad);
  auto loss = [&] {
    f.params.generation += 1;
    return rl::ppo_loss(f.params, f.buffer, f.indices, f.advantages, f.targets, f.clip, weights,
                        {})
        .total;
  };
  return max_fd_error(f.params.flat, grad, loss);
}

}  // namespace pourlab::testing

#endif  // POURLAB_TESTS_GRADCHECK_HPP_
