#ifndef POURLAB_BEHAVIOR_HPP_
#define POURLAB_BEHAVIOR_HPP_

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pourlab/pour_sim.hpp"

namespace pourlab::behavior {

// Raw per-step signals captured from the simulator, in world coordinates.
struct TraceSample {
  double elapsed = 0.0;
  sim::Vec2 end_effector;
  double end_effector_angle = 0.0;  // sum of joint angles, rad
  double scale_force = 0.0;
  sim::JointVector torques{};
  double effort = 0.0;
  double settled_mass = 0.0;
  double spilled_mass = 0.0;
  double rim_mass = 0.0;
  double in_flight_mass = 0.0;
  bool emitting = false;
  std::vector<double> landings_x;
};

struct EnvTrace {
  double dt = 0.01;
  int horizon = 0;
  double total_mass = 0.0;
  double target_mass = 0.0;
  std::vector<TraceSample> samples;
};

// Builds a trace sample from the state and info after a simulator step.
TraceSample capture(const sim::EnvState& state, const sim::StepInfo& info,
                    const sim::EnvConfig& config);

struct LogSample {
  double elapsed = 0.0;
  double x = 0.0;      // m, relative to the first sample
  double z = 0.0;      // m, relative to the first sample
  double angle = 0.0;  // rad, relative to the first sample
  double scale_force = 0.0;
  sim::JointVector torques{};
  double effort = 0.0;
  double settled_mass = 0.0;
  double spilled_mass = 0.0;
  double rim_mass = 0.0;
  double in_flight_mass = 0.0;
  bool emitting = false;
  std::vector<double> landings_x;  // world x, m
  friend bool operator==(const LogSample&, const LogSample&) = default;
};

struct TrajectoryLog {
  double dt = 0.01;
  int horizon = 0;
  double total_mass = 0.0;
  double target_mass = 0.0;
  std::vector<LogSample> samples;
  friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
};

// Pure transform: pose signals become relative to the first sample.
// Throws UsageError if the trace is longer than its horizon.
TrajectoryLog record(const EnvTrace& trace);

// One JSON object per sample.
void write_jsonl(std::ostream& out, const TrajectoryLog& log);

struct BehaviorFeatures {
  double fill_ratio = 0.0;
  double spill_ratio = 0.0;
  double rim_ratio = 0.0;
  double unreleased_ratio = 0.0;
  std::optional<double> time_to_target;
  double effort_total = 0.0;
  int oscillation_count = 0;
  double landing_spread = 0.0;
  bool emission_ongoing_at_horizon = false;
  friend bool operator==(const BehaviorFeatures&, const BehaviorFeatures&) = default;
};

struct FeatureConfig {
  int smoothing_window = 5;
  // Smoothed |vx| below this (m/s) carries no direction.
  double velocity_deadband = 0.01;
};

void validate(const FeatureConfig& config);

// Throws UsageError on an empty log.
BehaviorFeatures extract_features(const TrajectoryLog& log, const FeatureConfig& config = {});

// Declaration order is the rubric priority used for tie-breaking.
enum class BehaviorLabel {
  kExcluded,
  kWatering,
  kRimCleaner,
  kMixing,
  kPourFast,
  kPourBase,
  kPourSlow,
  kNoPolicy,
};
inline constexpr int kLabelCount = 8;
inline constexpr std::array<BehaviorLabel, kLabelCount> kAllLabels{
    BehaviorLabel::kExcluded, BehaviorLabel::kWatering, BehaviorLabel::kRimCleaner,
    BehaviorLabel::kMixing,   BehaviorLabel::kPourFast, BehaviorLabel::kPourBase,
    BehaviorLabel::kPourSlow, BehaviorLabel::kNoPolicy};

std::string_view to_string(BehaviorLabel label);
std::optional<BehaviorLabel> parse_label(std::string_view text);

// Three-way outcome class of a label.
enum class SkillClass { kOriginalTask, kNovelSkill, kNoPolicy, kExcluded };
SkillClass skill_class(BehaviorLabel label);
std::string_view to_string(SkillClass cls);

struct ClassifierThresholds {
  double fill_success = 0.8;
  double spill_max = 0.2;
  double fast_quantile = 0.8;
  double slow_quantile = 1.25;
  double rim_min = 0.3;
  int mixing_oscillations_min = 4;
  double watering_spread_min = 0.12;  // 2 x default container half-width, m
};

void validate(const ClassifierThresholds& thresholds);

BehaviorLabel classify(const BehaviorFeatures& features, const ClassifierThresholds& thresholds,
                       double baseline_time_median);

struct ConfigSummary {
  std::array<int, kLabelCount> histogram{};  // indexed by label order, Excluded included
  int counted = 0;                           // trials left after exclusion
  BehaviorLabel majority = BehaviorLabel::kExcluded;
};

// Excluded trials are dropped before the vote; ties go to the earlier label in
// rubric order. If every trial is excluded the majority is Excluded.
ConfigSummary aggregate(const std::vector<BehaviorLabel>& labels);

// Key of one evaluation: (config index, seed, episode).
using TrialKey = std::tuple<int, std::uint64_t, int>;
using LabelOverrides = std::map<TrialKey, BehaviorLabel>;

// Plain text, one `config_index seed episode label` per line; '#' starts a comment.
// Throws FormatError with the line number on malformed input.
LabelOverrides parse_overrides(std::istream& in);

double median(std::vector<double> values);

}  // namespace pourlab::behavior

#endif  // POURLAB_BEHAVIOR_HPP_
