#include <doctest.h>

#include "aprl/locomotion.hpp"

using namespace aprl;

namespace {

AgentState on_foot_at(const Vec3& p, double heading = 0.0) {
  AgentState s;
  s.mode = ControlMode::OnFoot;
  s.position = p;
  s.orientation = Quat::from_axis_angle({0, 0, 1}, heading);
  return s;
}

std::shared_ptr<const InferenceModel> tiny_model(ControlMode mode) {
  Rng rng(4);
  auto policy = make_policy_model<float>(kObsVectorSize, {8}, kActionDim, rng);
  policy.mode = mode;
  return std::make_shared<InferenceModel>(InferenceModel::from_policy(policy));
}

}  // namespace

TEST_CASE("target directly ahead drives pure forward motion") {
  const ActionVector a = scripted_locomotion(on_foot_at({0, 0, 0}), {10, 0, 0});
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[3] == doctest::Approx(0.0));
}

TEST_CASE("target behind saturates yaw with no forward drive") {
  const ActionVector a = scripted_locomotion(on_foot_at({0, 0, 0}), {-10, 0.01, 0});
  CHECK(std::abs(a[3]) == doctest::Approx(1.0));
  CHECK(a[0] == doctest::Approx(0.0));
}

TEST_CASE("inside the arrival radius everything is zero") {
  const ActionVector a = scripted_locomotion(on_foot_at({0, 0, 0}), {0.5, 0.5, 0});
  for (double v : a) CHECK(v == 0.0);
}

TEST_CASE("closed-loop walking converges to the target") {
  const double dt = 1.0 / 30.0;
  for (double heading : {0.0, 1.5, 3.1, -2.0}) {
    AgentState s = on_foot_at({0, 0, 0}, heading);
    const Vec3 target{15, -10, 0};
    bool arrived = false;
    for (int step = 0; step < 400 && !arrived; ++step) {
      const ActionVector a = scripted_locomotion(s, target);
      s = step_on_foot(s, a, dt);
      arrived = (Vec3{target.x - s.position.x, target.y - s.position.y, 0}).norm() < 1.0;
    }
    CHECK(arrived);
  }
}

TEST_CASE("locomotion selection follows the piloting mode") {
  ModelRegistry registry;
  registry.register_model(ControlMode::Helicopter, tiny_model(ControlMode::Helicopter));
  registry.register_model(ControlMode::ZeroG, tiny_model(ControlMode::ZeroG));
  ObjectiveCommand command{ObjectiveCommand::Kind::MoveTo, {1, 2, 3}, 0.0,
                           ControlMode::Helicopter, 0};

  AgentState s = on_foot_at({0, 0, 0});
  CHECK(select_locomotion(s, command, registry).source == LocomotionSource::Scripted);

  s.mode = ControlMode::Helicopter;
  const LocomotionKind heli = select_locomotion(s, command, registry);
  CHECK(heli.source == LocomotionSource::Learned);
  CHECK(heli.model->mode() == ControlMode::Helicopter);

  s.mode = ControlMode::ZeroG;
  const LocomotionKind zg = select_locomotion(s, command, registry);
  CHECK(zg.source == LocomotionSource::Learned);
  CHECK(zg.model->mode() == ControlMode::ZeroG);
}

TEST_CASE("a missing model is an error, never a silent fallback") {
  ModelRegistry registry;  // nothing registered
  ObjectiveCommand command;
  AgentState s;
  s.mode = ControlMode::ZeroG;
  CHECK_THROWS_AS(select_locomotion(s, command, registry), ValidationError);
}

TEST_CASE("the handoff switches exactly at the mode transition") {
  ModelRegistry registry;
  registry.register_model(ControlMode::Helicopter, tiny_model(ControlMode::Helicopter));
  ObjectiveCommand command;
  AgentState s = on_foot_at({0, 0, 0});
  std::vector<LocomotionSource> sources;
  for (int t = 0; t < 6; ++t) {
    s.mode = t < 3 ? ControlMode::OnFoot : ControlMode::Helicopter;  // enters at t=3
    sources.push_back(select_locomotion(s, command, registry).source);
  }
  for (int t = 0; t < 3; ++t) CHECK(sources[t] == LocomotionSource::Scripted);
  for (int t = 3; t < 6; ++t) CHECK(sources[t] == LocomotionSource::Learned);
}
