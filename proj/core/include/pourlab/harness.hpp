#ifndef POURLAB_HARNESS_HPP_
#define POURLAB_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pourlab/behavior.hpp"
#include "pourlab/config.hpp"
#include "pourlab/policy.hpp"

namespace pourlab::harness {

// Runs fn(0..n-1) on `workers` threads. Rethrows the exception of the lowest
// failing index after all workers stop.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// Deterministic mean-action rollout of one evaluation episode.
behavior::TrajectoryLog rollout_log(const rl::PolicyParams& params, const sim::EnvConfig& env,
                                    std::uint64_t episode_seed);

// Episode k uses the seed rl::evaluate would use for (seed_base, k).
std::vector<behavior::TrajectoryLog> evaluate_policy(const rl::PolicyParams& params,
                                                     const sim::EnvConfig& env, int episodes,
                                                     std::uint64_t seed_base);

struct FeatureRow {
  int config_index = -1;
  double w_t = 0.0;
  double w_e = 0.0;
  std::uint64_t seed = 0;
  int episode = 0;
  behavior::BehaviorFeatures features;
};

struct LabelRow {
  int config_index = -1;
  double w_t = 0.0;
  double w_e = 0.0;
  std::uint64_t seed = 0;
  int episode = 0;
  behavior::BehaviorLabel label = behavior::BehaviorLabel::kNoPolicy;
};

std::vector<std::string> feature_header();
std::vector<std::string> feature_fields(const FeatureRow& row);
void write_features_csv(const std::filesystem::path& path, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_features_csv(const std::filesystem::path& path);

void write_labels_csv(const std::filesystem::path& path, const std::vector<LabelRow>& rows);
std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path);

// Median time-to-target of successful baseline-cell pours; falls back to all
// successful pours, then to the episode duration.
double baseline_time_median(const std::vector<FeatureRow>& rows, int baseline_index,
                            const behavior::ClassifierThresholds& thresholds,
                            double episode_duration);

std::vector<LabelRow> classify_rows(const std::vector<FeatureRow>& rows,
                                    const behavior::ClassifierThresholds& thresholds,
                                    double baseline_median,
                                    const behavior::LabelOverrides& overrides = {});

struct TrainOutput {
  std::filesystem::path policy;
  std::filesystem::path curve;
};

// Trains grid cell `index` with `seed`, writes artifact and curve under
// out/policies and out/curves, and records the run in out/manifest.json.
TrainOutput cmd_train(const SweepConfig& config, int index, std::uint64_t seed,
                      const std::filesystem::path& out, const std::string& config_file_sha256 = {});

struct SweepOptions {
  std::string config_file_sha256;
  // Stop after this many newly trained runs (simulates an interruption); < 0 means no limit.
  int max_new_runs = -1;
};

struct SweepResult {
  int trained = 0;
  int skipped = 0;
  bool complete = false;
  std::vector<LabelRow> labels;
};

SweepResult cmd_sweep(const SweepConfig& config, const std::filesystem::path& out,
                      const SweepOptions& options = {});

// Appends one feature row per episode to out/features.csv and writes
// out/trajectories/<stem>_e<k>.jsonl.
std::vector<FeatureRow> cmd_eval(const SweepConfig& config, const std::filesystem::path& policy,
                                 int episodes, std::uint64_t seed_base,
                                 const std::filesystem::path& out, int config_index = -1);

// Reads out/features.csv and writes out/labels.csv.
std::vector<LabelRow> cmd_classify(const SweepConfig& config, const std::filesystem::path& out,
                                   const std::optional<std::filesystem::path>& overrides = {});

// Reads out/labels.csv and writes out/summary.csv and out/grid.svg.
void cmd_report(const std::filesystem::path& out);

}  // namespace pourlab::harness

#endif  // POURLAB_HARNESS_HPP_
