#ifndef POURLAB_POLICY_HPP_
#define POURLAB_POLICY_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pourlab/mlp.hpp"
#include "pourlab/reward.hpp"

namespace pourlab::rl {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Running mean/variance of raw observations (parallel Welford merge).
struct ObsNormalizer {
  std::vector<double> mean;
  std::vector<double> var;
  double count = 0.0;
  double clip = 10.0;

  static ObsNormalizer identity(int size);
  void update(std::span<const double> obs);
  std::vector<double> normalize(std::span<const double> obs) const;
  friend bool operator==(const ObsNormalizer&, const ObsNormalizer&) = default;
};

// Actor (Gaussian mean), state-independent log-std and critic, stored in one
// flat buffer: [actor | log_std | critic].
struct PolicyParams {
  MlpShape actor;
  MlpShape critic;
  std::vector<double> flat;
  ObsNormalizer obs_norm;
  reward::RewardWeights trained_weights;
  std::uint64_t generation = 0;  // bumped whenever `flat` changes

  static PolicyParams create(int obs_dim, int act_dim, std::vector<int> hidden,
                             double init_log_std, std::mt19937_64& rng);

  int obs_dim() const { return actor.input_size(); }
  int act_dim() const { return actor.output_size(); }

  std::span<const double> actor_params() const;
  std::span<const double> log_std() const;
  std::span<const double> critic_params() const;
  std::span<double> actor_params();
  std::span<double> log_std();
  std::span<double> critic_params();

  std::size_t actor_offset() const { return 0; }
  std::size_t log_std_offset() const { return actor.param_count(); }
  std::size_t critic_offset() const { return actor.param_count() + act_dim(); }

  void clamp_log_std();
  bool all_finite() const;

  friend bool operator==(const PolicyParams& a, const PolicyParams& b) {
    return a.actor == b.actor && a.critic == b.critic && a.flat == b.flat &&
           a.obs_norm == b.obs_norm && a.trained_weights == b.trained_weights;
  }
};

struct ActionSample {
  std::vector<double> action;
  std::vector<double> mean;
  double log_prob = 0.0;
};

// Mean action for an already normalized observation.
std::vector<double> policy_mean(const PolicyParams& params, std::span<const double> norm_obs);

double value_estimate(const PolicyParams& params, std::span<const double> norm_obs);

// Log-density of `action` under N(mean, diag(exp(log_std))^2).
double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         std::span<const double> log_std);

double gaussian_entropy(std::span<const double> log_std);

// action = mean + exp(log_std) * z, z ~ N(0, I).
ActionSample sample_action(const PolicyParams& params, std::span<const double> norm_obs,
                           std::mt19937_64& rng);

// Versioned decimal-text artifact. read_policy throws FormatError naming the
// offending field.
void write_policy(std::ostream& out, const PolicyParams& params);
PolicyParams read_policy(std::istream& in);
void save_policy(const std::string& path, const PolicyParams& params);
PolicyParams load_policy(const std::string& path);

}  // namespace pourlab::rl

#endif  // POURLAB_POLICY_HPP_
