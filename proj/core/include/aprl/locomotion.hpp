#pragma once

#include <map>
#include <memory>

#include "aprl/inference.hpp"
#include "aprl/objectives.hpp"
#include "aprl/sim.hpp"

namespace aprl {

// On-foot actions reuse the zero-g slot order: [forward, strafe, -, yaw, -].
inline constexpr double kOnFootArrivalRadius = 1.0;  // meters

// Proportional on-foot controller: yaw toward the target, throttle forward
// scaled by alignment, everything zero inside the arrival radius.
ActionVector scripted_locomotion(const AgentState& state, const Vec3& target);

// Kinematic ground movement used by the scripted controller's tests and the
// bot demos; no physics, just heading + planar velocity.
struct OnFootParams {
  double walk_speed = 4.0;   // m/s at full forward
  double turn_rate = 2.5;    // rad/s at full yaw
};
AgentState step_on_foot(const AgentState& state, const ActionVector& action, double dt,
                        const OnFootParams& params = {});

enum class LocomotionSource { Scripted, Learned };

struct LocomotionKind {
  LocomotionSource source = LocomotionSource::Scripted;
  ControlMode mode = ControlMode::OnFoot;
  std::shared_ptr<const InferenceModel> model;  // set iff source == Learned
};

// Registry mapping vehicle modes to their deployed policies, so different
// vehicle types can run different models.
class ModelRegistry {
 public:
  void register_model(ControlMode mode, std::shared_ptr<const InferenceModel> model);
  bool has(ControlMode mode) const;
  std::shared_ptr<const InferenceModel> get(ControlMode mode) const;

 private:
  std::map<ControlMode, std::shared_ptr<const InferenceModel>> models_;
};

// Learned locomotion whenever the agent pilots a vehicle (helicopter or
// zero-g), scripted otherwise. A missing model for the active vehicle mode
// is an error, never a silent fallback.
LocomotionKind select_locomotion(const AgentState& state, const ObjectiveCommand& command,
                                 const ModelRegistry& registry);

}  // namespace aprl
