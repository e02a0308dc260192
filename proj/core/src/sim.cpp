#include "aprl/sim.hpp"

#include <cmath>

#include "aprl/errors.hpp"

namespace aprl {

const char* to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::Helicopter: return "helicopter";
    case ControlMode::ZeroG: return "zerog";
    case ControlMode::OnFoot: return "onfoot";
  }
  return "?";
}

namespace {

bool action_finite(const ActionVector& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void validate_inputs(const AgentState& state, const ActionVector& action) {
  if (!state.finite()) throw ValidationError("step: non-finite agent state");
  if (!action_finite(action)) throw ValidationError("step: non-finite action");
}

ActionVector clamp_action(const ActionVector& a) {
  ActionVector out;
  for (int i = 0; i < kActionDim; ++i) out[i] = clamp(a[i], -1.0, 1.0);
  return out;
}

// Shared rigid-body integration once the mass-normalized world-frame force
// and the body-frame torque are known.
AgentState integrate(const AgentState& state, const Vec3& force_world,
                     const Vec3& torque_body, const World& world,
                     const VehicleParams& params, bool ground_is_floor) {
  const double dt = world.dt;
  AgentState next = state;

  // angular: semi-implicit Euler with linear angular drag, body frame
  const Vec3 omega = state.angular_velocity +
                     dt * (torque_body - params.angular_drag * state.angular_velocity);
  next.angular_velocity = omega;

  // orientation from the new body rates, exact exponential map
  Quat q = state.orientation * Quat::exp_map(omega * dt);
  q = q.normalized();
  // keep the same hemisphere as the previous sample so delta-q stays small
  if (q.dot(state.orientation) < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
  next.orientation = q;

  // linear: drag evaluated at the old velocity
  const Vec3 accel = force_world - params.linear_drag * state.velocity;
  Vec3 vel = state.velocity + dt * accel;
  Vec3 pos = state.position + dt * vel;

  // soft walls: clamp and zero the normal velocity component; the bottom
  // face keeps the vertical velocity when it doubles as the ground so the
  // contact check sees the true impact speed
  const Aabb& b = world.bounds;
  if (pos.x < b.min.x) { pos.x = b.min.x; vel.x = 0.0; }
  if (pos.x > b.max.x) { pos.x = b.max.x; vel.x = 0.0; }
  if (pos.y < b.min.y) { pos.y = b.min.y; vel.y = 0.0; }
  if (pos.y > b.max.y) { pos.y = b.max.y; vel.y = 0.0; }
  if (pos.z > b.max.z) { pos.z = b.max.z; vel.z = 0.0; }
  if (pos.z < b.min.z) {
    pos.z = b.min.z;
    if (!ground_is_floor) vel.z = 0.0;
  }

  next.velocity = vel;
  next.position = pos;
  next.acceleration = (vel - state.velocity) / dt;

  if (next.grounded && pos.z > world.ground_height + kContactTolerance) {
    next.grounded = false;
  }
  return next;
}

Vec3 body_torque(const ActionVector& a, const VehicleParams& params, int pitch_idx,
                 int yaw_idx, int roll_idx) {
  // body frame: x=roll axis, y=pitch axis, z=yaw axis
  return {params.torque_gains.roll * a[roll_idx],
          params.torque_gains.pitch * a[pitch_idx],
          params.torque_gains.yaw * a[yaw_idx]};
}

}  // namespace

AgentState step_helicopter(const AgentState& state, const ActionVector& action,
                           const World& world, const VehicleParams& params) {
  validate_inputs(state, action);
  if (!state.alive) return state;

  const ActionVector a = clamp_action(action);
  const double thrust = params.max_thrust * (a[0] + 1.0) * 0.5;
  const Vec3 force = thrust * state.orientation.up() + Vec3{0.0, 0.0, -params.gravity};
  const Vec3 torque = body_torque(a, params, /*pitch=*/1, /*yaw=*/2, /*roll=*/3);
  const bool ground_is_floor = world.bounds.min.z >= world.ground_height - kContactTolerance;
  return integrate(state, force, torque, world, params, ground_is_floor);
}

AgentState step_zero_g(const AgentState& state, const ActionVector& action,
                       const World& world, const VehicleParams& params) {
  validate_inputs(state, action);
  if (!state.alive) return state;

  const ActionVector a = clamp_action(action);
  // forward along body-x, strafe along body-right (-y in the x-forward/y-left frame)
  const Vec3 force_body{params.move_force * a[0], -params.move_force * a[1], 0.0};
  const Vec3 force = state.orientation.rotate(force_body);
  const Vec3 torque = body_torque(a, params, /*pitch=*/2, /*yaw=*/3, /*roll=*/4);
  return integrate(state, force, torque, world, params, /*ground_is_floor=*/false);
}

AgentState step(const AgentState& state, const ActionVector& action,
                const World& world, const VehicleParams& params) {
  return state.mode == ControlMode::ZeroG ? step_zero_g(state, action, world, params)
                                          : step_helicopter(state, action, world, params);
}

ContactReport detect_ground_contact(const AgentState& state, const World& world,
                                    const VehicleParams& params) {
  (void)params;
  ContactReport report;
  report.touching = state.position.z <= world.ground_height + kContactTolerance;
  if (!report.touching) return report;
  report.impact_speed = std::abs(state.velocity.z);
  report.inverted = state.orientation.up().dot({0.0, 0.0, 1.0}) <= 0.0;
  return report;
}

void resolve_ground_contact(AgentState& state, const ContactReport& contact,
                            const World& world, const VehicleParams& params) {
  if (!contact.touching || !state.alive) return;
  if (state.velocity.z > 0.0) return;  // ascending through the contact band
  if (contact.impact_speed > params.crash_speed || contact.inverted) {
    state.alive = false;
    return;
  }
  state.grounded = true;
  state.position.z = world.ground_height;
  state.velocity = {};
  state.acceleration = {};
  state.angular_velocity = {};
}

Quat random_orientation(Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double t2 = 2.0 * std::numbers::pi * u2;
  const double t3 = 2.0 * std::numbers::pi * u3;
  return Quat{a * std::sin(t2), a * std::cos(t2), b * std::sin(t3), b * std::cos(t3)}
      .normalized();
}

AgentState spawn(const World& world, ControlMode mode, Rng& rng) {
  AgentState s;
  s.mode = mode;
  const Aabb& b = world.bounds;
  s.position.x = rng.uniform(b.min.x, b.max.x);
  s.position.y = rng.uniform(b.min.y, b.max.y);
  if (mode == ControlMode::ZeroG) {
    s.position.z = rng.uniform(b.min.z, b.max.z);
    s.orientation = random_orientation(rng);
  } else {
    s.position.z = world.ground_height;
    s.orientation = Quat::identity();
    s.grounded = true;
  }
  return s;
}

}  // namespace aprl
