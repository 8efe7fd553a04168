#include "pourlab/pour_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pourlab/error.hpp"

namespace pourlab::sim {
namespace {

void require(bool ok, const char* field, const char* reason) {
  if (!ok) throw ConfigError(field, reason);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.z, s * v.x + c * v.z};
}

// Joint origins followed by the end-effector.
std::array<Vec2, kJoints + 1> chain_points(const ArmState& arm, const EnvConfig& config) {
  std::array<Vec2, kJoints + 1> points;
  points[0] = config.base;
  double absolute = 0.0;
  for (int j = 0; j < kJoints; ++j) {
    absolute += arm.joint_angles[j];
    points[j + 1] = {points[j].x + config.link_lengths[j] * std::cos(absolute),
                     points[j].z + config.link_lengths[j] * std::sin(absolute)};
  }
  return points;
}

}  // namespace

void validate(const EnvConfig& c) {
  require(finite_positive(c.dt), "dt", "must be > 0");
  require(c.horizon >= 1, "horizon", "must be >= 1");
  require(std::isfinite(c.gravity) && c.gravity >= 0.0, "gravity", "must be finite and >= 0");
  require(c.particle_count >= 1, "particle_count", "must be >= 1");
  require(finite_positive(c.particle_mass), "particle_mass", "must be > 0");
  require(finite_positive(c.cup.lip_offset), "cup.lip_offset", "must be > 0");
  require(finite_positive(c.cup.half_width), "cup.half_width", "must be > 0");
  require(finite_positive(c.cup.depth), "cup.depth", "must be > 0");
  require(finite_positive(c.cup.fill_level) && c.cup.fill_level <= 1.0, "cup.fill_level",
          "must be in (0, 1]");
  require(std::isfinite(c.container.center_x), "container.center_x", "must be finite");
  require(finite_positive(c.container.half_width), "container.half_width", "must be > 0");
  require(finite_positive(c.container.rim_half_thickness), "container.rim_half_thickness",
          "must be > 0");
  require(std::isfinite(c.container.rim_z), "container.rim_z", "must be finite");
  require(finite_positive(c.target_fill_fraction) && c.target_fill_fraction <= 1.0,
          "target_fill_fraction", "must be in (0, 1]");
  require(finite_positive(c.torque_limit), "torque_limit", "must be > 0");
  for (int j = 0; j < kJoints; ++j) {
    require(finite_positive(c.link_lengths[j]), "link_lengths", "must be > 0");
    require(std::isfinite(c.joint_damping[j]) && c.joint_damping[j] >= 0.0, "joint_damping",
            "must be >= 0");
    require(c.joint_lower[j] < c.joint_upper[j], "joint_limits", "lower must be < upper");
    require(c.home_angles[j] >= c.joint_lower[j] && c.home_angles[j] <= c.joint_upper[j],
            "home_angles", "must lie within joint limits");
  }
  require(finite_positive(c.emission_rate_max), "emission_rate_max", "must be > 0");
  require(finite_positive(c.emission_gain), "emission_gain", "must be > 0");
  require(std::isfinite(c.jet_speed) && c.jet_speed >= 0.0, "jet_speed", "must be >= 0");
  require(std::isfinite(c.jet_jitter) && c.jet_jitter >= 0.0, "jet_jitter", "must be >= 0");
  require(std::isfinite(c.payload_mass) && c.payload_mass >= 0.0, "payload_mass",
          "must be >= 0");
  require(std::isfinite(c.home_jitter) && c.home_jitter >= 0.0, "home_jitter", "must be >= 0");
}

std::pair<EnvState, Observation> reset(const EnvConfig& config, std::uint64_t seed) {
  validate(config);
  EnvState state;
  state.rng.seed(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (int j = 0; j < kJoints; ++j) {
    const double angle = config.home_angles[j] + config.home_jitter * jitter(state.rng);
    state.arm.joint_angles[j] = std::clamp(angle, config.joint_lower[j], config.joint_upper[j]);
  }
  const CupPose pose = cup_pose(state.arm, config);
  state.particles.assign(config.particle_count, Particle{pose.lip, {}, Phase::kInCup, false});
  state.buckets.in_cup = config.particle_count;
  return {state, observe(state, config)};
}

Action clamp_action(const Action& action, const EnvConfig& config) {
  Action out;
  for (int j = 0; j < kJoints; ++j) {
    const double t = std::isfinite(action.torques[j]) ? action.torques[j] : 0.0;
    out.torques[j] = std::clamp(t, -config.torque_limit, config.torque_limit);
  }
  return out;
}

JointVector gravity_torque(const ArmState& arm, const EnvConfig& config) {
  JointVector torque{};
  if (config.payload_mass == 0.0 || config.gravity == 0.0) return torque;
  const auto points = chain_points(arm, config);
  const Vec2 center = cup_pose(arm, config).center;
  const double weight = config.payload_mass * config.gravity;
  for (int j = 0; j < kJoints; ++j) torque[j] = weight * (center.x - points[j].x);
  return torque;
}

ArmState arm_dynamics(const ArmState& arm, const Action& action, const EnvConfig& config) {
  const JointVector g = gravity_torque(arm, config);
  ArmState next;
  for (int j = 0; j < kJoints; ++j) {
    const double accel =
        action.torques[j] - config.joint_damping[j] * arm.joint_velocities[j] - g[j];
    double omega = arm.joint_velocities[j] + config.dt * accel;
    double theta = arm.joint_angles[j] + config.dt * omega;
    if (theta < config.joint_lower[j]) {
      theta = config.joint_lower[j];
      omega = 0.0;
    } else if (theta > config.joint_upper[j]) {
      theta = config.joint_upper[j];
      omega = 0.0;
    }
    next.joint_angles[j] = theta;
    next.joint_velocities[j] = omega;
  }
  return next;
}

CupPose cup_pose(const ArmState& arm, const EnvConfig& config) {
  const auto points = chain_points(arm, config);
  const double link_angle = arm.joint_angles[0] + arm.joint_angles[1] + arm.joint_angles[2];
  CupPose pose;
  pose.end_effector = points[kJoints];
  // Cup frame: x along the last link, z along the opening normal.
  const Vec2 lip_local{config.cup.half_width, config.cup.lip_offset};
  const Vec2 lip = rotate(lip_local, link_angle);
  pose.lip = {pose.end_effector.x + lip.x, pose.end_effector.z + lip.z};
  const Vec2 center = rotate({0.0, 0.5 * config.cup.depth}, link_angle);
  pose.center = {pose.end_effector.x + center.x, pose.end_effector.z + center.z};
  pose.up = rotate({0.0, 1.0}, link_angle);
  pose.tilt = -link_angle;
  return pose;
}

double spill_threshold(double fill_remaining, const EnvConfig& config) {
  const double level = std::clamp(fill_remaining, 0.0, 1.0) * config.cup.fill_level;
  // Liquid surface stays horizontal: it reaches the lip when
  // level*depth + half_width*tan(tilt) = depth.
  return std::atan((config.cup.depth * (1.0 - level)) / config.cup.half_width);
}

void emission_update(EnvState& state, const CupPose& pose, const Vec2& lip_velocity,
                     const EnvConfig& config) {
  const int in_cup = state.buckets.in_cup;
  const double fill = static_cast<double>(in_cup) / config.particle_count;
  const double margin = pose.tilt - spill_threshold(fill, config);
  if (in_cup == 0 || margin <= 0.0) {
    state.emitting = false;
    state.emission_accumulator = 0.0;
    return;
  }
  state.emitting = true;
  const double rate = std::min(config.emission_gain * margin, config.emission_rate_max);
  state.emission_accumulator += rate * config.dt;
  const int count = std::min(static_cast<int>(std::floor(state.emission_accumulator)), in_cup);
  state.emission_accumulator -= count;

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    Particle& p = state.particles[state.next_emission++];
    const Vec2 dir = rotate(pose.up, config.jet_jitter * normal(state.rng));
    p.position = pose.lip;
    p.velocity = {lip_velocity.x + config.jet_speed * dir.x,
                  lip_velocity.z + config.jet_speed * dir.z};
    p.phase = Phase::kInFlight;
  }
  state.buckets.in_cup -= count;
  state.buckets.in_flight += count;
}

void particle_update(EnvState& state, const EnvConfig& config) {
  const auto& box = config.container;
  state.last_impact_impulse = 0.0;
  state.last_landings_x.clear();
  for (int i = 0; i < state.next_emission; ++i) {
    Particle& p = state.particles[i];
    if (p.phase != Phase::kInFlight) continue;
    const Vec2 prev = p.position;
    double land_x = prev.x;
    bool landed = false;
    if (prev.z <= box.rim_z) {
      landed = true;  // released at or below rim height
    } else {
      p.velocity.z -= config.gravity * config.dt;
      p.position = {prev.x + config.dt * p.velocity.x, prev.z + config.dt * p.velocity.z};
      if (p.position.z <= box.rim_z) {
        const double s = (prev.z - box.rim_z) / (prev.z - p.position.z);
        land_x = prev.x + s * (p.position.x - prev.x);
        landed = true;
      }
    }
    if (!landed) continue;
    p.position = {land_x, box.rim_z};
    state.buckets.in_flight -= 1;
    state.last_landings_x.push_back(land_x);
    const double offset = std::abs(land_x - box.center_x);
    if (offset < box.half_width) {
      p.phase = Phase::kSettledIn;
      state.buckets.settled += 1;
      state.last_impact_impulse += config.particle_mass * std::abs(p.velocity.z);
    } else {
      p.phase = Phase::kSpilledOut;
      if (offset <= box.half_width + box.rim_half_thickness) {
        p.on_rim = true;
        state.buckets.rim += 1;
      } else {
        state.buckets.spilled += 1;
      }
    }
    p.velocity = {};
  }
}

ScaleReading scale_read(const EnvState& state, const EnvConfig& config) {
  return {config.gravity * state.settled_mass(config) + state.last_impact_impulse / config.dt};
}

Observation observe(const EnvState& state, const EnvConfig& config) {
  Observation obs{};
  const CupPose pose = cup_pose(state.arm, config);
  for (int j = 0; j < kJoints; ++j) {
    obs[kObsJointAngle0 + j] = state.arm.joint_angles[j];
    obs[kObsJointVelocity0 + j] = state.arm.joint_velocities[j];
  }
  obs[kObsLipX] = pose.lip.x;
  obs[kObsLipZ] = pose.lip.z;
  obs[kObsTilt] = pose.tilt;
  obs[kObsFillRemaining] = static_cast<double>(state.buckets.in_cup) / config.particle_count;
  obs[kObsSettledFraction] = static_cast<double>(state.buckets.settled) / config.particle_count;
  obs[kObsTime] = static_cast<double>(state.step_index) / config.horizon;
  return obs;
}

StepResult step(EnvState& state, const Action& action, const EnvConfig& config) {
  if (state.done || state.step_index >= config.horizon) {
    throw UsageError("step called on a finished episode");
  }
  const Action applied = clamp_action(action, config);
  const CupPose before = cup_pose(state.arm, config);
  state.arm = arm_dynamics(state.arm, applied, config);
  const CupPose after = cup_pose(state.arm, config);
  const Vec2 lip_velocity{(after.lip.x - before.lip.x) / config.dt,
                          (after.lip.z - before.lip.z) / config.dt};

  emission_update(state, after, lip_velocity, config);
  particle_update(state, config);
  state.step_index += 1;

  StepResult result;
  auto& info = result.info;
  info.accuracy = static_cast<double>(state.buckets.settled) / config.particle_count;
  for (int j = 0; j < kJoints; ++j) {
    const double u = applied.torques[j] / config.torque_limit;
    info.effort += u * u;
  }
  info.effort *= config.dt;
  info.elapsed = state.step_index * config.dt;
  info.scale = scale_read(state, config);
  info.applied_torques = applied.torques;

  const double target_count = config.target_fill_fraction * config.particle_count;
  const bool filled = state.buckets.settled >= target_count && state.buckets.in_flight == 0;
  state.done = filled || state.step_index >= config.horizon;
  result.done = state.done;
  result.observation = observe(state, config);
  return result;
}

}  // namespace pourlab::sim
