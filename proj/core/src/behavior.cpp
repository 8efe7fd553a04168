#include "pourlab/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pourlab/error.hpp"

namespace pourlab::behavior {

TraceSample capture(const sim::EnvState& state, const sim::StepInfo& info,
                    const sim::EnvConfig& config) {
  const sim::CupPose pose = sim::cup_pose(state.arm, config);
  TraceSample s;
  s.elapsed = info.elapsed;
  s.end_effector = pose.end_effector;
  s.end_effector_angle = 0.0;
  for (double a : state.arm.joint_angles) s.end_effector_angle += a;
  s.scale_force = info.scale.force_z;
  s.torques = info.applied_torques;
  s.effort = info.effort;
  s.settled_mass = state.settled_mass(config);
  s.spilled_mass = state.spilled_mass(config);
  s.rim_mass = state.rim_mass(config);
  s.in_flight_mass = state.in_flight_mass(config);
  s.emitting = state.emitting;
  s.landings_x = state.last_landings_x;
  return s;
}

TrajectoryLog record(const EnvTrace& trace) {
  if (static_cast<long>(trace.samples.size()) > trace.horizon) {
    throw UsageError("record: trace longer than horizon");
  }
  TrajectoryLog log;
  log.dt = trace.dt;
  log.horizon = trace.horizon;
  log.total_mass = trace.total_mass;
  log.target_mass = trace.target_mass;
  log.samples.reserve(trace.samples.size());
  if (trace.samples.empty()) return log;
  const TraceSample& first = trace.samples.front();
  for (const TraceSample& s : trace.samples) {
    LogSample o;
    o.elapsed = s.elapsed;
    o.x = s.end_effector.x - first.end_effector.x;
    o.z = s.end_effector.z - first.end_effector.z;
    o.angle = s.end_effector_angle - first.end_effector_angle;
    o.scale_force = s.scale_force;
    o.torques = s.torques;
    o.effort = s.effort;
    o.settled_mass = s.settled_mass;
    o.spilled_mass = s.spilled_mass;
    o.rim_mass = s.rim_mass;
    o.in_flight_mass = s.in_flight_mass;
    o.emitting = s.emitting;
    o.landings_x = s.landings_x;
    log.samples.push_back(std::move(o));
  }
  return log;
}

void write_jsonl(std::ostream& out, const TrajectoryLog& log) {
  for (const LogSample& s : log.samples) {
    nlohmann::ordered_json j;
    j["t"] = s.elapsed;
    j["x"] = s.x;
    j["z"] = s.z;
    j["angle"] = s.angle;
    j["force_z"] = s.scale_force;
    j["torques"] = s.torques;
    j["effort"] = s.effort;
    j["settled_mass"] = s.settled_mass;
    j["spilled_mass"] = s.spilled_mass;
    j["rim_mass"] = s.rim_mass;
    j["in_flight_mass"] = s.in_flight_mass;
    j["emitting"] = s.emitting;
    j["landings_x"] = s.landings_x;
    out << j.dump() << '\n';
  }
}

void validate(const FeatureConfig& config) {
  if (config.smoothing_window < 1) throw ConfigError("smoothing_window", "must be >= 1");
  if (!(config.velocity_deadband >= 0.0)) throw ConfigError("velocity_deadband", "must be >= 0");
}

namespace {

// Masses are particle counts times a particle mass, so a ratio that should be
// exactly 0.8 can land one ulp below it. Threshold tests allow for that.
constexpr double kTolerance = 1e-9;

int count_reversals(const TrajectoryLog& log, const FeatureConfig& config) {
  const auto& samples = log.samples;
  const std::size_t n = samples.size();
  // Finite-difference x-velocity; the first sample has none.
  std::vector<double> vx(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) vx[k] = (samples[k].x - samples[k - 1].x) / log.dt;
  const std::size_t w = static_cast<std::size_t>(config.smoothing_window);
  int reversals = 0;
  int last_sign = 0;
  double window_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    window_sum += vx[k];
    if (k >= w) window_sum -= vx[k - w];
    const double smoothed = window_sum / static_cast<double>(std::min(k + 1, w));
    if (!samples[k].emitting) continue;
    int sign = 0;
    if (smoothed > config.velocity_deadband) sign = 1;
    if (smoothed < -config.velocity_deadband) sign = -1;
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++reversals;
    last_sign = sign;
  }
  return reversals;
}

}  // namespace

BehaviorFeatures extract_features(const TrajectoryLog& log, const FeatureConfig& config) {
  if (log.samples.empty()) throw UsageError("extract_features: empty log");
  validate(config);
  if (!(log.total_mass > 0.0)) throw UsageError("extract_features: total mass must be positive");

  const LogSample& last = log.samples.back();
  BehaviorFeatures f;
  f.fill_ratio = last.settled_mass / log.total_mass;
  f.spill_ratio = last.spilled_mass / log.total_mass;
  f.rim_ratio = last.rim_mass / log.total_mass;
  // Clamped so rounding in the subtraction cannot leave [0, 1].
  f.unreleased_ratio = std::clamp(
      (log.total_mass - last.settled_mass - last.spilled_mass - last.rim_mass) / log.total_mass,
      0.0, 1.0);

  double landing_sum = 0.0;
  std::size_t landing_count = 0;
  for (const LogSample& s : log.samples) {
    f.effort_total += s.effort;
    if (!f.time_to_target && s.settled_mass >= log.target_mass * (1.0 - kTolerance)) {
      f.time_to_target = s.elapsed;
    }
    for (double x : s.landings_x) {
      landing_sum += x;
      ++landing_count;
    }
  }
  if (landing_count > 1) {
    const double mean = landing_sum / static_cast<double>(landing_count);
    double sq = 0.0;
    for (const LogSample& s : log.samples) {
      for (double x : s.landings_x) sq += (x - mean) * (x - mean);
    }
    f.landing_spread = std::sqrt(sq / static_cast<double>(landing_count));
  }
  f.oscillation_count = count_reversals(log, config);
  f.emission_ongoing_at_horizon = static_cast<int>(log.samples.size()) >= log.horizon &&
                                  (last.emitting || last.in_flight_mass > 0.0);
  return f;
}

std::string_view to_string(BehaviorLabel label) {
  switch (label) {
    case BehaviorLabel::kExcluded: return "Excluded";
    case BehaviorLabel::kWatering: return "Watering";
    case BehaviorLabel::kRimCleaner: return "RimCleaner";
    case BehaviorLabel::kMixing: return "Mixing";
    case BehaviorLabel::kPourFast: return "PourFast";
    case BehaviorLabel::kPourBase: return "PourBase";
    case BehaviorLabel::kPourSlow: return "PourSlow";
    case BehaviorLabel::kNoPolicy: return "NoPolicy";
  }
  return "?";
}

std::optional<BehaviorLabel> parse_label(std::string_view text) {
  for (BehaviorLabel l : kAllLabels) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

SkillClass skill_class(BehaviorLabel label) {
  switch (label) {
    case BehaviorLabel::kPourFast:
    case BehaviorLabel::kPourBase:
    case BehaviorLabel::kPourSlow: return SkillClass::kOriginalTask;
    case BehaviorLabel::kWatering:
    case BehaviorLabel::kRimCleaner:
    case BehaviorLabel::kMixing: return SkillClass::kNovelSkill;
    case BehaviorLabel::kNoPolicy: return SkillClass::kNoPolicy;
    case BehaviorLabel::kExcluded: return SkillClass::kExcluded;
  }
  return SkillClass::kNoPolicy;
}

std::string_view to_string(SkillClass cls) {
  switch (cls) {
    case SkillClass::kOriginalTask: return "original";
    case SkillClass::kNovelSkill: return "novel";
    case SkillClass::kNoPolicy: return "none";
    case SkillClass::kExcluded: return "excluded";
  }
  return "?";
}

void validate(const ClassifierThresholds& t) {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive and finite");
  };
  positive(t.fill_success, "fill_success");
  positive(t.spill_max, "spill_max");
  positive(t.fast_quantile, "fast_quantile");
  positive(t.slow_quantile, "slow_quantile");
  positive(t.rim_min, "rim_min");
  positive(t.watering_spread_min, "watering_spread_min");
  if (t.mixing_oscillations_min < 1) throw ConfigError("mixing_oscillations_min", "must be >= 1");
  if (!(t.fast_quantile < t.slow_quantile)) {
    throw ConfigError("fast_quantile", "must be below slow_quantile");
  }
}

BehaviorLabel classify(const BehaviorFeatures& f, const ClassifierThresholds& t,
                       double baseline_time_median) {
  validate(t);
  if (!(baseline_time_median > 0.0) || !std::isfinite(baseline_time_median)) {
    throw UsageError("classify: baseline_time_median must be positive");
  }
  if (f.emission_ongoing_at_horizon) return BehaviorLabel::kExcluded;
  const bool filled = f.fill_ratio >= t.fill_success - kTolerance;
  if (f.landing_spread >= t.watering_spread_min - kTolerance && !filled) {
    return BehaviorLabel::kWatering;
  }
  if (f.rim_ratio >= t.rim_min - kTolerance) return BehaviorLabel::kRimCleaner;
  if (f.oscillation_count >= t.mixing_oscillations_min &&
      f.fill_ratio >= 0.5 * t.fill_success - kTolerance) {
    return BehaviorLabel::kMixing;
  }
  if (filled && f.spill_ratio <= t.spill_max + kTolerance) {
    // Reaching the fill ratio implies the target time exists unless the
    // target fraction differs from fill_success; treat a missing time as slow.
    if (!f.time_to_target) return BehaviorLabel::kPourSlow;
    const double time = *f.time_to_target;
    if (time < t.fast_quantile * baseline_time_median) return BehaviorLabel::kPourFast;
    if (time > t.slow_quantile * baseline_time_median) return BehaviorLabel::kPourSlow;
    return BehaviorLabel::kPourBase;
  }
  return BehaviorLabel::kNoPolicy;
}

ConfigSummary aggregate(const std::vector<BehaviorLabel>& labels) {
  ConfigSummary s;
  for (BehaviorLabel l : labels) {
    s.histogram[static_cast<int>(l)] += 1;
    if (l != BehaviorLabel::kExcluded) s.counted += 1;
  }
  int best = 0;
  for (int i = 1; i < kLabelCount; ++i) {  // index 0 is Excluded
    if (s.histogram[i] > best) {
      best = s.histogram[i];
      s.majority = kAllLabels[i];
    }
  }
  return s;
}

LabelOverrides parse_overrides(std::istream& in) {
  LabelOverrides out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    int config_index = 0;
    std::uint64_t seed = 0;
    int episode = 0;
    std::string label_text, extra;
    std::istringstream head(first);
    const std::string where = "line " + std::to_string(line_no);
    if (!(head >> config_index) || !head.eof() || !(fields >> seed >> episode >> label_text)) {
      throw FormatError(where, "expected `config_index seed episode label`");
    }
    if (fields >> extra) throw FormatError(where, "trailing text after label");
    const auto label = parse_label(label_text);
    if (!label) throw FormatError(where, "unknown label '" + label_text + "'");
    out[{config_index, seed, episode}] = *label;
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace pourlab::behavior
