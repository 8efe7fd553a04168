#ifndef POURLAB_POUR_SIM_HPP_
#define POURLAB_POUR_SIM_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace pourlab::sim {

inline constexpr int kJoints = 3;
inline constexpr int kObsDim = 12;

// Observation layout (kObsDim entries).
enum ObsIndex : int {
  kObsJointAngle0 = 0,
  kObsJointVelocity0 = 3,
  kObsLipX = 6,
  kObsLipZ = 7,
  kObsTilt = 8,
  kObsFillRemaining = 9,
  kObsSettledFraction = 10,
  kObsTime = 11,
};

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

using JointVector = std::array<double, kJoints>;

struct CupGeometry {
  double lip_offset = 0.08;  // lip height above the end-effector, m
  double half_width = 0.04;  // m
  double depth = 0.08;       // m
  double fill_level = 0.7;   // initial liquid height as a fraction of depth
};

struct ContainerGeometry {
  double center_x = 0.72;             // m
  double half_width = 0.06;           // opening half-width, m
  double rim_half_thickness = 0.02;   // m
  double rim_z = 0.15;                // m
};

struct EnvConfig {
  double dt = 0.01;
  int horizon = 1000;
  double gravity = 9.81;
  int particle_count = 200;
  double particle_mass = 0.001;
  CupGeometry cup;
  ContainerGeometry container;
  double target_fill_fraction = 0.8;
  double torque_limit = 5.0;
  JointVector link_lengths{0.4, 0.35, 0.1};
  JointVector joint_damping{0.5, 0.5, 0.5};
  double emission_rate_max = 200.0;  // particles/s

  // Emission rate per radian of tilt beyond the spill angle, particles/s/rad.
  double emission_gain = 400.0;
  double jet_speed = 0.3;    // m/s along the opening normal
  double jet_jitter = 0.05;  // rad, std-dev of the jet direction
  // Mass whose weight loads the joints (cup plus liquid), kg.
  double payload_mass = 0.0;
  Vec2 base{0.0, 0.3};
  JointVector home_angles{1.0, -1.6, 0.15};
  double home_jitter = 0.02;  // rad, uniform perturbation of the home pose
  JointVector joint_lower{-0.5, -2.8, -2.5};
  JointVector joint_upper{2.0, 0.5, 2.5};

  double total_mass() const { return particle_count * particle_mass; }
};

// Throws ConfigError naming the first violated field.
void validate(const EnvConfig& config);

struct ArmState {
  JointVector joint_angles{};
  JointVector joint_velocities{};
  friend bool operator==(const ArmState&, const ArmState&) = default;
};

enum class Phase : std::uint8_t { kInCup, kInFlight, kSettledIn, kSpilledOut };

struct Particle {
  Vec2 position;
  Vec2 velocity;
  Phase phase = Phase::kInCup;
  bool on_rim = false;  // SpilledOut onto the rim annulus
  friend bool operator==(const Particle&, const Particle&) = default;
};

// Integer bucket counts; masses are derived as count * particle_mass.
struct MassBuckets {
  int in_cup = 0;
  int in_flight = 0;
  int settled = 0;
  int spilled = 0;
  int rim = 0;
  int total() const { return in_cup + in_flight + settled + spilled + rim; }
  friend bool operator==(const MassBuckets&, const MassBuckets&) = default;
};

struct EnvState {
  ArmState arm;
  std::vector<Particle> particles;
  MassBuckets buckets;
  int step_index = 0;
  int next_emission = 0;  // particles [0, next_emission) have left the cup
  double emission_accumulator = 0.0;
  bool emitting = false;
  double last_impact_impulse = 0.0;  // N*s, landings inside during last step
  std::vector<double> last_landings_x;  // landing x of every particle last step
  bool done = false;
  std::mt19937_64 rng;

  double settled_mass(const EnvConfig& c) const { return buckets.settled * c.particle_mass; }
  double spilled_mass(const EnvConfig& c) const { return buckets.spilled * c.particle_mass; }
  double rim_mass(const EnvConfig& c) const { return buckets.rim * c.particle_mass; }
  double in_cup_mass(const EnvConfig& c) const { return buckets.in_cup * c.particle_mass; }
  double in_flight_mass(const EnvConfig& c) const { return buckets.in_flight * c.particle_mass; }

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct Action {
  JointVector torques{};
};

using Observation = std::array<double, kObsDim>;

struct ScaleReading {
  double force_z = 0.0;
};

struct StepInfo {
  double accuracy = 0.0;  // settled fraction of total mass
  double effort = 0.0;    // dt * sum of (applied torque / torque_limit)^2, s
  double elapsed = 0.0;   // s
  ScaleReading scale;
  JointVector applied_torques{};
};

struct StepResult {
  Observation observation{};
  StepInfo info;
  bool done = false;
};

struct CupPose {
  Vec2 end_effector;
  Vec2 lip;
  Vec2 center;  // cup centre of mass
  Vec2 up;      // unit opening normal
  double tilt = 0.0;  // rad; positive lowers the lip towards +x
};

std::pair<EnvState, Observation> reset(const EnvConfig& config, std::uint64_t seed);

// Advances one physics step in place. Throws UsageError once the episode is done.
StepResult step(EnvState& state, const Action& action, const EnvConfig& config);

Action clamp_action(const Action& action, const EnvConfig& config);

// Semi-implicit Euler on decoupled unit-inertia joints. `action` must already
// be clamped; `payload_mass` drives the gravity torque.
ArmState arm_dynamics(const ArmState& arm, const Action& action, const EnvConfig& config);

JointVector gravity_torque(const ArmState& arm, const EnvConfig& config);

CupPose cup_pose(const ArmState& arm, const EnvConfig& config);

// Tilt at which liquid reaches the lip, for a cup holding `fill_remaining` of
// its initial load. Monotone decreasing in fill_remaining.
double spill_threshold(double fill_remaining, const EnvConfig& config);

// Converts InCup particles to InFlight according to the current tilt margin.
void emission_update(EnvState& state, const CupPose& pose, const Vec2& lip_velocity,
                     const EnvConfig& config);

// Ballistic flight plus landing classification at rim height.
void particle_update(EnvState& state, const EnvConfig& config);

ScaleReading scale_read(const EnvState& state, const EnvConfig& config);

Observation observe(const EnvState& state, const EnvConfig& config);

}  // namespace pourlab::sim

#endif  // POURLAB_POUR_SIM_HPP_
