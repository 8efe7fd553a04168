#ifndef POURLAB_CONFIG_HPP_
#define POURLAB_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pourlab/behavior.hpp"
#include "pourlab/pour_sim.hpp"
#include "pourlab/ppo.hpp"
#include "pourlab/reward.hpp"

namespace pourlab::harness {

struct SweepConfig {
  sim::EnvConfig env;
  rl::PPOConfig ppo;
  reward::RewardWeights baseline;
  reward::MutationSpec mutation;
  behavior::ClassifierThresholds thresholds;
  behavior::FeatureConfig features;
  int seeds_per_config = 3;
  int evals_per_policy = 10;
  std::uint64_t seed = 1;  // training seeds are seed, seed + 1, ...
  int workers = 1;
  std::string output_dir = "results";
  bool write_trajectories = false;

  std::vector<std::uint64_t> seeds() const;
};

// Desk-scale training budget used when no config overrides it.
SweepConfig default_config();

// Shrinks budgets so a full sweep finishes in well under a minute.
void apply_ci_profile(SweepConfig& config);

// Throws ConfigError naming the first violated field as `section.key`.
void validate(const SweepConfig& config);

// INI with sections; ';' or '#' start comments. Unknown sections or keys are
// rejected. Keys absent from the text keep the values already in `config`.
void parse_config(std::istream& in, SweepConfig& config);
void load_config(const std::string& path, SweepConfig& config);

// Canonical INI text listing every field; parse_config(write_config(c)) == c.
std::string write_config(const SweepConfig& config);

}  // namespace pourlab::harness

#endif  // POURLAB_CONFIG_HPP_
