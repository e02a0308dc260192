#pragma once

#include <array>
#include <cstdint>

#include "aprl/geom.hpp"
#include "aprl/rng.hpp"

namespace aprl {

enum class ControlMode : std::uint8_t { Helicopter = 0, ZeroG = 1, OnFoot = 2 };

const char* to_string(ControlMode mode);

// Raw control inputs, each component in [-1, 1].
// Helicopter: throttle, pitch, yaw, roll, fire.
// ZeroG:      forward, strafe, pitch, yaw, roll.
using ActionVector = std::array<double, 5>;

inline constexpr int kActionDim = 5;

struct AgentState {
  Vec3 position;                  // meters, world frame
  Vec3 velocity;                  // m/s, world frame
  Vec3 acceleration;              // m/s^2, world frame, (v_new - v_old)/dt
  Quat orientation;               // body -> world
  Vec3 angular_velocity;          // rad/s, body frame (x=roll, y=pitch, z=yaw)
  bool alive = true;
  bool grounded = false;
  ControlMode mode = ControlMode::Helicopter;

  bool finite() const {
    return position.finite() && velocity.finite() && acceleration.finite() &&
           orientation.finite() && angular_velocity.finite();
  }
};

struct World {
  Aabb bounds{{-30.0, -30.0, 0.0}, {30.0, 30.0, 60.0}};
  double ground_height = 0.0;  // flat plane
  double dt = 1.0 / 30.0;      // fixed timestep, seconds

  bool valid() const { return bounds.valid() && dt > 0.0; }
};

struct TorqueGains {
  double pitch = 2.0;  // rad/s^2 per unit action
  double yaw = 2.0;
  double roll = 2.0;
};

// All forces are mass-normalized (N/kg == m/s^2).
struct VehicleParams {
  double max_thrust = 18.0;   // N/kg; throttle [-1,1] maps to [0, max_thrust]
  TorqueGains torque_gains;
  double linear_drag = 0.3;   // 1/s
  double angular_drag = 2.0;  // 1/s
  double move_force = 12.0;   // N/kg along body axes in zero-g
  double gravity = 9.81;      // m/s^2; 0 in zero-g
  double crash_speed = 3.0;   // m/s vertical impact that destroys the vehicle

  bool valid() const {
    return max_thrust >= 0.0 && torque_gains.pitch >= 0.0 && torque_gains.yaw >= 0.0 &&
           torque_gains.roll >= 0.0 && linear_drag >= 0.0 && angular_drag >= 0.0 &&
           move_force >= 0.0 && crash_speed > 0.0;
  }
};

inline constexpr double kContactTolerance = 0.05;  // meters

struct ContactReport {
  bool touching = false;
  double impact_speed = 0.0;  // |vertical velocity| at contact, m/s
  bool inverted = false;      // body-up . world-z <= 0
};

// One fixed-dt semi-implicit Euler step of the gravity-bound helicopter.
// Thrust acts along body-up; torques about body axes; linear/angular drag.
// Positions are clamped to world bounds (soft walls). The clamp at the
// ground face keeps the incoming vertical velocity so the contact check can
// read the impact speed; landing/crash resolution is the caller's job
// (see detect_ground_contact / resolve_ground_contact).
// Throws ValidationError on non-finite state or action.
AgentState step_helicopter(const AgentState& state, const ActionVector& action,
                           const World& world, const VehicleParams& params);

// Zero-gravity 6-DOF step: forces along body-forward/body-right, torques
// about all three body axes, no gravity, drag only.
AgentState step_zero_g(const AgentState& state, const ActionVector& action,
                       const World& world, const VehicleParams& params);

// Dispatch on state.mode (Helicopter or ZeroG).
AgentState step(const AgentState& state, const ActionVector& action,
                const World& world, const VehicleParams& params);

ContactReport detect_ground_contact(const AgentState& state, const World& world,
                                    const VehicleParams& params);

// Applies the crash/landing rule for a contact report: kills the agent on a
// hard or inverted impact, otherwise settles it on the ground.
void resolve_ground_contact(AgentState& state, const ContactReport& contact,
                            const World& world, const VehicleParams& params);

// Helicopter: level at rest on a uniformly sampled ground position.
// ZeroG: uniformly sampled position and orientation, zero velocity.
AgentState spawn(const World& world, ControlMode mode, Rng& rng);

// Uniform random orientation (Shoemake's method).
Quat random_orientation(Rng& rng);

}  // namespace aprl
