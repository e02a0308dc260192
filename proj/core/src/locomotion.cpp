#include "aprl/locomotion.hpp"

#include <cmath>

#include "aprl/errors.hpp"

namespace aprl {

ActionVector scripted_locomotion(const AgentState& state, const Vec3& target) {
  ActionVector action{};
  Vec3 to_target = target - state.position;
  to_target.z = 0.0;
  const double dist = to_target.norm();
  if (dist < kOnFootArrivalRadius) return action;

  Vec3 fwd = state.orientation.forward();
  fwd.z = 0.0;
  if (fwd.norm() < 1e-9) return action;
  fwd = fwd.normalized();
  const Vec3 dir = to_target.normalized();

  const double align = fwd.dot(dir);
  const double heading_error = std::atan2(fwd.x * dir.y - fwd.y * dir.x, align);

  action[3] = clamp(2.0 * heading_error, -1.0, 1.0);        // yaw
  action[0] = clamp(2.0 * std::max(0.0, align), 0.0, 1.0);  // forward
  return action;
}

AgentState step_on_foot(const AgentState& state, const ActionVector& action, double dt,
                        const OnFootParams& params) {
  AgentState next = state;
  const double yaw_rate = clamp(action[3], -1.0, 1.0) * params.turn_rate;
  next.orientation =
      (state.orientation * Quat::from_axis_angle({0, 0, 1}, yaw_rate * dt)).normalized();
  const Vec3 fwd = next.orientation.forward();
  const Vec3 left = next.orientation.rotate({0, 1, 0});
  const double forward = clamp(action[0], -1.0, 1.0) * params.walk_speed;
  const double strafe = clamp(action[1], -1.0, 1.0) * params.walk_speed;
  Vec3 vel = forward * Vec3{fwd.x, fwd.y, 0.0} - strafe * Vec3{left.x, left.y, 0.0};
  next.velocity = vel;
  next.position += vel * dt;
  next.acceleration = (next.velocity - state.velocity) / dt;
  return next;
}

void ModelRegistry::register_model(ControlMode mode,
                                   std::shared_ptr<const InferenceModel> model) {
  models_[mode] = std::move(model);
}

bool ModelRegistry::has(ControlMode mode) const { return models_.contains(mode); }

std::shared_ptr<const InferenceModel> ModelRegistry::get(ControlMode mode) const {
  const auto it = models_.find(mode);
  return it == models_.end() ? nullptr : it->second;
}

LocomotionKind select_locomotion(const AgentState& state, const ObjectiveCommand& command,
                                 const ModelRegistry& registry) {
  (void)command;  // the handoff is decided by the piloting mode alone
  LocomotionKind kind;
  kind.mode = state.mode;
  if (state.mode != ControlMode::Helicopter && state.mode != ControlMode::ZeroG) {
    kind.source = LocomotionSource::Scripted;
    return kind;
  }
  kind.source = LocomotionSource::Learned;
  kind.model = registry.get(state.mode);
  if (!kind.model)
    throw ValidationError(std::string("no model registered for ") + to_string(state.mode) +
                          " locomotion");
  if (kind.model->obs_layout_version() != kObsLayoutVersion)
    throw ValidationError("registered model has an incompatible observation layout");
  return kind;
}

}  // namespace aprl
